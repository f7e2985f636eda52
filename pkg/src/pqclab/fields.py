"""Scalar arithmetic: Z_q for the lattice scheme, GF(2^m) and GF(2^m)[x] for Goppa codes.

Field elements of GF(2^m) are plain ints in polynomial basis (bit i is the
coefficient of z^i). Polynomials over GF(2^m) are 1-D ``int64`` numpy arrays,
lowest degree first, with no trailing zero coefficients; the zero polynomial
is the empty array.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .counters import OpCounters

Q = 3329

# Barrett constant for 32-bit inputs: floor(2^32 / q)
_BARRETT_SHIFT = 32
_BARRETT_V = (1 << _BARRETT_SHIFT) // Q

# Least irreducible binary polynomial of each degree, as an int (bit i = x^i).
REDUCTION_POLYS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11B,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
}


class DivisionByZero(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# Z_q


def barrett_reduce(a):
    """Reduce ``0 <= a < 2**32`` modulo q without data-dependent branches.

    Works on Python ints and on int64 numpy arrays alike.
    """
    r = a - ((a * _BARRETT_V) >> _BARRETT_SHIFT) * Q
    # r is in [0, 2q); subtract q and add it back when negative (sign mask)
    r = r - Q
    return r + ((r >> 63) & Q)


def zq_mul(a: int, b: int) -> int:
    return barrett_reduce(a * b)


def zq_add(a: int, b: int) -> int:
    return barrett_reduce(a + b)


def zq_sub(a: int, b: int) -> int:
    return barrett_reduce(a - b + Q)


# ---------------------------------------------------------------------------
# GF(2^m) scalars


def _binary_poly_is_irreducible(p: int) -> bool:
    d = p.bit_length() - 1
    for f in range(2, 1 << (d // 2 + 1)):
        r = p
        df = f.bit_length() - 1
        while r and r.bit_length() - 1 >= df:
            r ^= f << (r.bit_length() - 1 - df)
        if r == 0:
            return False
    return True


def least_irreducible(m: int) -> int:
    """Smallest (as an integer) irreducible binary polynomial of degree m."""
    return next(p for p in range(1 << m, 1 << (m + 1)) if _binary_poly_is_irreducible(p))


def clmul_reduce(a: int, b: int, m: int, poly: int) -> int:
    """Carry-less product of two m-bit values reduced by ``poly``; branch-free on data."""
    r = 0
    for i in range(m):
        r ^= a & -((b >> i) & 1)
        a <<= 1
    # a was shifted up to 2m-1 bits above; reduce high bits from the top down
    for i in range(2 * m - 2, m - 1, -1):
        r ^= (poly << (i - m)) & -((r >> i) & 1)
    return r


class GF2m:
    """The field GF(2^m) with log/antilog tables for bulk arithmetic.

    Tables are built from ``clmul_reduce``, so the fast and reference paths
    agree by construction; the test suite checks this exhaustively for small m.
    """

    def __init__(self, m: int):
        if m not in REDUCTION_POLYS:
            raise ValueError(f"unsupported extension degree m={m}")
        self.m = m
        self.poly = REDUCTION_POLYS[m]
        self.size = 1 << m
        self.order = self.size - 1
        self.generator = self._find_generator()

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.size, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x = clmul_reduce(x, self.generator, m, self.poly)
        exp[self.order :] = exp[: self.order]
        self.exp = exp
        self.log = log
        # square roots: sqrt(a) = a^(2^(m-1))
        sq = np.zeros(self.size, dtype=np.int64)
        sq[1:] = exp[(log[1:] * (self.size >> 1)) % self.order]
        self._sqrt = sq
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    def _find_generator(self) -> int:
        n = self.order
        prime_factors = [p for p in range(2, n + 1) if n % p == 0 and all(p % d for d in range(2, int(p**0.5) + 1))]
        for g in range(2, self.size):
            if all(self._pow_ref(g, n // p) != 1 for p in prime_factors):
                return g
        return 1  # GF(2) only

    def _pow_ref(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = clmul_reduce(r, a, self.m, self.poly)
            a = clmul_reduce(a, a, self.m, self.poly)
            e >>= 1
        return r

    def check(self, a: int) -> None:
        if not 0 <= a < self.size:
            raise ValueError(f"{a} is not an element of GF(2^{self.m})")

    # scalar fast paths

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("zero has no inverse in GF(2^m)")
        return self._exp_list[(self.order - self._log_list[a]) % self.order]

    def sqrt(self, a: int) -> int:
        return int(self._sqrt[a])

    # vectorised paths over int64 arrays (broadcasting like numpy)

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vinv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DivisionByZero("zero has no inverse in GF(2^m)")
        return self.exp[(self.order - self.log[a]) % self.order]

    def vsqrt(self, a):
        return self._sqrt[np.asarray(a, dtype=np.int64)]

    def elements(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.int64)


@lru_cache(maxsize=None)
def get_field(m: int) -> GF2m:
    return GF2m(m)


def gf2m_mul(a: int, b: int, field: GF2m) -> int:
    """Reference multiply: carry-less product reduced by the field polynomial."""
    field.check(a)
    field.check(b)
    return clmul_reduce(a, b, field.m, field.poly)


def gf2m_inv(a: int, field: GF2m) -> int:
    """Inverse by exponentiation to 2^m - 2 (reference path)."""
    field.check(a)
    if a == 0:
        raise DivisionByZero("zero has no inverse in GF(2^m)")
    return field._pow_ref(a, field.size - 2)


# ---------------------------------------------------------------------------
# GF(2^m)[x]


def poly(coeffs: Sequence[int] | np.ndarray) -> np.ndarray:
    """Build a trimmed polynomial array from low-to-high coefficients."""
    return poly_trim(np.asarray(coeffs, dtype=np.int64).copy())


def poly_trim(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(p)
    return p[: nz[-1] + 1] if nz.size else p[:0]


def poly_deg(p: np.ndarray) -> int:
    """Degree, with -1 for the zero polynomial."""
    return len(p) - 1


def poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) < len(b):
        a, b = b, a
    r = a.copy()
    r[: len(b)] ^= b
    return poly_trim(r)


def poly_scale(field: GF2m, p: np.ndarray, c: int, ops: OpCounters | None = None) -> np.ndarray:
    if ops is not None:
        ops.gf2m_mults += len(p)
    return poly_trim(field.vmul(p, c))


def poly_mul(field: GF2m, a: np.ndarray, b: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return a[:0]
    if len(a) > len(b):
        a, b = b, a
    r = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
    lb = len(b)
    for i, ai in enumerate(a.tolist()):
        if ai:
            r[i : i + lb] ^= field.vmul(ai, b)
    if ops is not None:
        ops.gf2m_mults += len(a) * len(b)
    return poly_trim(r)


def poly_divmod(
    field: GF2m, a: np.ndarray, b: np.ndarray, ops: OpCounters | None = None
) -> tuple[np.ndarray, np.ndarray]:
    db = poly_deg(b)
    if db < 0:
        raise DivisionByZero("polynomial division by zero")
    r = a.copy()
    if poly_deg(r) < db:
        return r[:0], poly_trim(r)
    quo = np.zeros(len(r) - db, dtype=np.int64)
    lead_inv = field.inv(int(b[-1]))
    monic = lead_inv == 1
    bn = b if monic else field.vmul(b, lead_inv)
    for i in range(len(r) - 1, db - 1, -1):
        c = int(r[i])
        if c:
            quo[i - db] = c
            r[i - db : i + 1] ^= field.vmul(c, bn)
    if ops is not None:
        ops.gf2m_mults += (len(quo)) * (db + 1) + (0 if monic else db + 1)
    if not monic:
        quo = field.vmul(quo, lead_inv)
    return poly_trim(quo), poly_trim(r[:db])


def poly_mod(field: GF2m, a: np.ndarray, g: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    return poly_divmod(field, a, g, ops)[1]


def poly_eval(field: GF2m, p: np.ndarray, x, ops: OpCounters | None = None):
    """Horner evaluation; ``x`` may be a scalar or an array of points."""
    scalar = np.ndim(x) == 0
    xs = np.asarray(x, dtype=np.int64)
    acc = np.zeros_like(xs)
    for c in p[::-1].tolist():
        acc = field.vmul(acc, xs) ^ c
    if ops is not None:
        ops.gf2m_mults += len(p) * max(xs.size, 1)
    return int(acc) if scalar else acc


def poly_sqr_mod(field: GF2m, p: np.ndarray, g: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    """p^2 mod g; squaring is coefficient-wise in characteristic 2."""
    if len(p) == 0:
        return p
    sq = np.zeros(2 * len(p) - 1, dtype=np.int64)
    sq[::2] = field.vmul(p, p)
    if ops is not None:
        ops.gf2m_mults += len(p)
    return poly_mod(field, sq, g, ops)


def poly_mulmod(field: GF2m, a: np.ndarray, b: np.ndarray, g: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    return poly_mod(field, poly_mul(field, a, b, ops), g, ops)


def poly_gcd(field: GF2m, a: np.ndarray, b: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    """Monic gcd."""
    while len(b):
        a, b = b, poly_mod(field, a, b, ops)
    if len(a) == 0:
        return a
    return poly_scale(field, a, field.inv(int(a[-1])), ops)


def poly_inv_mod(field: GF2m, a: np.ndarray, g: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    """Inverse of ``a`` modulo ``g``; raises DivisionByZero when gcd(a, g) != 1."""
    r0, r1 = g, poly_mod(field, a, g, ops)
    v0, v1 = g[:0], poly([1])
    while poly_deg(r1) > 0:
        q, r = poly_divmod(field, r0, r1, ops)
        r0, r1 = r1, r
        v0, v1 = v1, poly_add(v0, poly_mul(field, q, v1, ops))
    if len(r1) == 0:
        raise DivisionByZero("polynomial is not invertible modulo g")
    return poly_mod(field, poly_scale(field, v1, field.inv(int(r1[0])), ops), g, ops)


def poly_is_irreducible(field: GF2m, p: np.ndarray, ops: OpCounters | None = None) -> bool:
    """Distinct-degree test: p has no factor of degree d <= deg(p)/2.

    Checks gcd(x^(2^(m*d)) - x, p) == 1 for every such d. Expects a monic p.
    """
    n = poly_deg(p)
    if n < 1:
        raise ValueError("irreducibility is defined for degree >= 1")
    if n == 1:
        return True
    x = poly([0, 1])
    h = x
    for _ in range(1, n // 2 + 1):
        for _ in range(field.m):
            h = poly_sqr_mod(field, h, p, ops)
        if poly_deg(poly_gcd(field, p, poly_add(h, x), ops)) > 0:
            return False
    return True


def poly_partial_ea(
    field: GF2m, a: np.ndarray, g: np.ndarray, stop_deg: int, ops: OpCounters | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Extended Euclid on (g, a) halted once the remainder degree is <= stop_deg.

    Returns (u, v) with u = v*a mod g.
    """
    r0, r1 = g, a
    v0, v1 = g[:0], poly([1])
    while poly_deg(r1) > stop_deg:
        q, r = poly_divmod(field, r0, r1, ops)
        r0, r1 = r1, r
        v0, v1 = v1, poly_add(v0, poly_mul(field, q, v1, ops))
    return r1, v1


def sqrt_x_mod(field: GF2m, g: np.ndarray, ops: OpCounters | None = None) -> np.ndarray:
    """Square root of x modulo an irreducible g.

    Split g = g0^2 + x*g1^2; then x = (g0/g1)^2 mod g.
    """
    g0 = poly(field.vsqrt(g[0::2]))
    g1 = poly(field.vsqrt(g[1::2]))
    return poly_mulmod(field, g0, poly_inv_mod(field, g1, g, ops), g, ops)


def poly_sqrt_mod_g(
    field: GF2m, p: np.ndarray, g: np.ndarray, sqrt_x: np.ndarray, ops: OpCounters | None = None
) -> np.ndarray:
    """r with r^2 = p mod g, from the even/odd split p = e(x)^2 + x*o(x)^2."""
    p = poly_mod(field, p, g, ops)
    even = poly(field.vsqrt(p[0::2]))
    odd = poly(field.vsqrt(p[1::2]))
    return poly_add(even, poly_mulmod(field, sqrt_x, odd, g, ops))
