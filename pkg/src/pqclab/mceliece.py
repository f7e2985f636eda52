"""Binary Goppa McEliece: G' = S G P, y = m G' + e, Patterson decoding.

Two public-key shapes are produced from the same code:

* ``textbook``   - the full k x n matrix S G P with a uniform invertible S.
* ``systematic`` - S is chosen as the inverse of the leading k x k block of
  G P, so S G P = [I | T] and only T (k x (n - k)) is published.
"""

from __future__ import annotations

import os
import random
import struct
from dataclasses import dataclass

import numpy as np

from . import fields as ff
from .counters import OpCounters
from .gf2linalg import (
    BitMatrix,
    BitVector,
    Permutation,
    bm_mul,
    bm_rref,
    bm_vec_mul,
    null_space,
    perm_apply,
    permute_columns,
    random_invertible_pair,
)

TEXTBOOK = "textbook"
SYSTEMATIC = "systematic"
VARIANTS = (TEXTBOOK, SYSTEMATIC)
MAX_SYSTEMATIC_ATTEMPTS = 100
MAX_GOPPA_CANDIDATES = 100_000


class DecodingFailure(Exception):
    """The received word is not within distance t of a codeword."""


@dataclass(frozen=True)
class McElieceParams:
    name: str
    n: int
    t: int
    m: int

    def __post_init__(self):
        if self.n > 1 << self.m:
            raise ValueError(f"code length {self.n} exceeds field size 2^{self.m}")
        if self.k <= 0:
            raise ValueError("parameters leave no message dimension")

    @property
    def k(self) -> int:
        return self.n - self.m * self.t

    @property
    def level(self) -> str:
        return self.name

    @property
    def pk_bytes_systematic(self) -> int:
        return self.k * ((self.n - self.k + 7) // 8)

    @property
    def pk_bytes_textbook(self) -> int:
        return self.k * ((self.n + 7) // 8)

    def pk_bytes(self, variant: str = SYSTEMATIC) -> int:
        return self.pk_bytes_systematic if variant == SYSTEMATIC else self.pk_bytes_textbook

    @property
    def ct_bytes(self) -> int:
        return (self.n + 7) // 8

    @property
    def msg_bytes(self) -> int:
        return (self.k + 7) // 8


MCELIECE348864 = McElieceParams("348864", n=3488, t=64, m=12)
MCELIECE460896 = McElieceParams("460896", n=4608, t=96, m=13)
MCELIECE6688128 = McElieceParams("6688128", n=6688, t=128, m=13)
TOY16 = McElieceParams("toy-16", n=16, t=2, m=4)
TOY32 = McElieceParams("toy-32", n=32, t=3, m=5)
TOY64 = McElieceParams("toy-64", n=64, t=5, m=6)

PUBLISHED_PARAMS = (MCELIECE348864, MCELIECE460896, MCELIECE6688128)
PARAMS = {p.name: p for p in (*PUBLISHED_PARAMS, TOY16, TOY32, TOY64)}


def get_params(level: str | int) -> McElieceParams:
    key = str(level).lower().removeprefix("mceliece").removeprefix("-")
    try:
        return PARAMS[key]
    except KeyError:
        raise ValueError(f"unknown McEliece level {level!r}; choose from {sorted(PARAMS)}") from None


def rng_from_seed(seed: bytes | None) -> random.Random:
    return random.Random(os.urandom(32) if seed is None else bytes(seed))


# ---------------------------------------------------------------------------
# Goppa codes


@dataclass(eq=False)
class GoppaPrivateData:
    m: int
    g: np.ndarray
    support: np.ndarray
    sqrt_x: np.ndarray
    inv_g_support: np.ndarray  # 1 / g(alpha_i)

    @property
    def field(self) -> ff.GF2m:
        return ff.get_field(self.m)

    @property
    def t(self) -> int:
        return ff.poly_deg(self.g)

    @property
    def n(self) -> int:
        return self.support.size

    @classmethod
    def build(cls, m: int, g: np.ndarray, support: np.ndarray, ops: OpCounters | None = None) -> GoppaPrivateData:
        field = ff.get_field(m)
        support = np.asarray(support, dtype=np.int64)
        inv_g = field.vinv(ff.poly_eval(field, g, support, ops))
        return cls(m, g, support, ff.sqrt_x_mod(field, g, ops), inv_g)

    def __eq__(self, other):
        return (
            isinstance(other, GoppaPrivateData)
            and self.m == other.m
            and np.array_equal(self.g, other.g)
            and np.array_equal(self.support, other.support)
        )


def random_goppa_polynomial(field: ff.GF2m, t: int, rng: random.Random, ops: OpCounters | None = None) -> np.ndarray:
    """Monic irreducible polynomial of degree t with uniformly drawn lower coefficients."""
    for _ in range(MAX_GOPPA_CANDIDATES):
        g = ff.poly([rng.randrange(field.size) for _ in range(t)] + [1])
        if ff.poly_is_irreducible(field, g, ops):
            return g
    raise RuntimeError("no irreducible Goppa polynomial found")


def parity_check_matrix(goppa: GoppaPrivateData, ops: OpCounters | None = None) -> BitMatrix:
    """mt x n binary H: row j*m + b holds bit b of alpha_i^j / g(alpha_i)."""
    field = goppa.field
    m, t, n = goppa.m, goppa.t, goppa.n
    bits = np.zeros((m * t, n), dtype=np.uint8)
    cur = goppa.inv_g_support.copy()
    for j in range(t):
        for b in range(m):
            bits[j * m + b] = (cur >> b) & 1
        cur = field.vmul(cur, goppa.support)
    if ops is not None:
        ops.gf2m_mults += t * n
    return BitMatrix.from_bits(bits)


def _generate_code(params: McElieceParams, rng: random.Random, ops: OpCounters | None):
    if params.n > 1 << params.m:
        raise ValueError(f"code length {params.n} exceeds field size 2^{params.m}")
    field = ff.get_field(params.m)
    while True:
        g = random_goppa_polynomial(field, params.t, rng, ops)
        elems = list(range(field.size))
        rng.shuffle(elems)
        elems = np.array(elems, dtype=np.int64)
        roots = ff.poly_eval(field, g, elems) == 0
        support = elems[~roots][: params.n]
        goppa = GoppaPrivateData.build(params.m, g, support, ops)
        h = parity_check_matrix(goppa, ops)
        gen, free = null_space(h, ops)
        if gen.rows == params.k:
            return goppa, h, gen, free


def goppa_generate(
    params: McElieceParams, rng: random.Random, ops: OpCounters | None = None
) -> tuple[GoppaPrivateData, BitMatrix, BitMatrix]:
    """Sample a Goppa code; returns (private data, H, G) with G H^T = 0.

    G is built as a null-space basis of H, so it restricts to the identity on
    the free columns of H's echelon form. A fresh g is drawn if rank(H) < mt.
    """
    return _generate_code(params, rng, ops)[:3]


def syndrome_sums(goppa: GoppaPrivateData, y: BitVector, ops: OpCounters | None = None) -> np.ndarray:
    """s_j = sum over set bits of alpha_i^j / g(alpha_i), j < t (the field form of H y^T)."""
    field = goppa.field
    idx = np.flatnonzero(y.to_bits())
    alpha = goppa.support[idx]
    w = goppa.inv_g_support[idx]
    out = np.zeros(goppa.t, dtype=np.int64)
    for j in range(goppa.t):
        out[j] = np.bitwise_xor.reduce(w) if w.size else 0
        w = field.vmul(w, alpha)
    if ops is not None:
        ops.gf2m_mults += goppa.t * idx.size
    return out


def syndrome_poly(goppa: GoppaPrivateData, y: BitVector, ops: OpCounters | None = None) -> np.ndarray:
    """S(x) = sum_i y_i / (x - alpha_i) mod g.

    With g(x) - g(a) = (x - a) Q_a(x), 1/(x - a) = Q_a(x) / g(a) mod g, and the
    coefficient of x^j is sum_{l > j} g_l * s_{l-1-j}.
    """
    field = goppa.field
    s = syndrome_sums(goppa, y, ops)
    g = goppa.g
    t = goppa.t
    coeffs = np.zeros(t, dtype=np.int64)
    for j in range(t):
        coeffs[j] = np.bitwise_xor.reduce(field.vmul(g[j + 1 : t + 1], s[: t - j]))
    if ops is not None:
        ops.gf2m_mults += t * (t + 1) // 2
    return ff.poly_trim(coeffs)


def patterson_decode(
    goppa: GoppaPrivateData, y: BitVector, ops: OpCounters | None = None
) -> tuple[BitVector, BitVector]:
    """Correct up to t errors in y; returns (codeword, error)."""
    field = goppa.field
    g = goppa.g
    t = goppa.t
    if y.length != goppa.n:
        raise ValueError(f"received word has length {y.length}, code length is {goppa.n}")
    s = syndrome_poly(goppa, y, ops)
    if len(s) == 0:
        return y, BitVector.zeros(y.length)
    x = ff.poly([0, 1])
    t_inv = ff.poly_inv_mod(field, s, g, ops)
    tau = ff.poly_sqrt_mod_g(field, ff.poly_add(t_inv, x), g, goppa.sqrt_x, ops)
    a, b = ff.poly_partial_ea(field, tau, g, t // 2, ops)
    sigma = ff.poly_add(ff.poly_mul(field, a, a, ops), ff.poly_mul(field, x, ff.poly_mul(field, b, b, ops)))
    deg = ff.poly_deg(sigma)
    if deg < 1 or deg > t:
        raise DecodingFailure(f"error locator has degree {deg}")
    values = ff.poly_eval(field, sigma, goppa.support, ops)
    positions = np.flatnonzero(values == 0)
    if positions.size != deg:
        raise DecodingFailure(f"error locator of degree {deg} has {positions.size} roots on the support")
    bits = np.zeros(y.length, dtype=np.uint8)
    bits[positions] = 1
    e = BitVector.from_bits(bits)
    c = y ^ e
    if syndrome_sums(goppa, c, ops).any():
        raise DecodingFailure("corrected word is not a codeword")
    return c, e


# ---------------------------------------------------------------------------
# keys


@dataclass(eq=False)
class McEliecePublicKey:
    params: McElieceParams
    variant: str
    matrix: BitMatrix

    def to_bytes(self) -> bytes:
        return self.matrix.to_bytes()

    @classmethod
    def from_bytes(cls, params: McElieceParams, variant: str, raw: bytes) -> McEliecePublicKey:
        cols = params.n - params.k if variant == SYSTEMATIC else params.n
        return cls(params, variant, BitMatrix.from_bytes(params.k, cols, raw))

    def generator(self) -> BitMatrix:
        """The full k x n generator S G P."""
        if self.variant == TEXTBOOK:
            return self.matrix
        return BitMatrix.identity(self.params.k).hstack(self.matrix)

    def __eq__(self, other):
        return (
            isinstance(other, McEliecePublicKey)
            and self.variant == other.variant
            and self.params == other.params
            and self.matrix == other.matrix
        )


@dataclass(eq=False)
class McElieceSecretKey:
    params: McElieceParams
    variant: str
    goppa: GoppaPrivateData
    perm: Permutation
    s_inv: BitMatrix | None = None
    g_right_inv: BitMatrix | None = None

    def to_bytes(self) -> bytes:
        p = self.params
        out = [
            struct.pack("<B", VARIANTS.index(self.variant)),
            self.goppa.g.astype("<u2").tobytes(),
            self.goppa.support.astype("<u2").tobytes(),
            _pad_poly(self.goppa.sqrt_x, p.t).astype("<u2").tobytes(),
            self.perm.map.astype("<u2").tobytes(),
        ]
        if self.variant == TEXTBOOK:
            out += [self.s_inv.to_bytes(), self.g_right_inv.to_bytes()]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, params: McElieceParams, raw: bytes) -> McElieceSecretKey:
        n, t, k = params.n, params.t, params.k
        words = 2 * (t + 1) + 2 * n + 2 * t + 2 * n
        if len(raw) < 1 + words:
            raise ValueError("secret key file is truncated")
        variant = VARIANTS[raw[0]] if raw[0] < len(VARIANTS) else None
        if variant is None:
            raise ValueError("unknown key variant")
        arr = np.frombuffer(raw[1 : 1 + words], dtype="<u2").astype(np.int64)
        g, rest = arr[: t + 1], arr[t + 1 :]
        support, rest = rest[:n], rest[n:]
        sqrt_x, perm = ff.poly_trim(rest[:t].copy()), rest[t:]
        field = ff.get_field(params.m)
        if (
            ff.poly_deg(g) != t
            or g[-1] != 1
            or np.any(arr >= field.size)
            or np.unique(support).size != n
        ):
            raise ValueError("malformed Goppa data in secret key")
        g_support = ff.poly_eval(field, g, support)
        if np.any(g_support == 0):
            raise ValueError("secret key support contains a root of g")
        inv_g = field.vinv(g_support)
        goppa = GoppaPrivateData(params.m, g.copy(), support.copy(), sqrt_x, inv_g)
        tail = raw[1 + words :]
        s_inv = g_right_inv = None
        if variant == TEXTBOOK:
            kw, nw = k * ((k + 7) // 8), n * ((k + 7) // 8)
            if len(tail) != kw + nw:
                raise ValueError("secret key file has the wrong length")
            s_inv = BitMatrix.from_bytes(k, k, tail[:kw])
            g_right_inv = BitMatrix.from_bytes(n, k, tail[kw:])
        elif tail:
            raise ValueError("secret key file has trailing bytes")
        return cls(params, variant, goppa, Permutation(perm.copy()), s_inv, g_right_inv)

    def __eq__(self, other):
        return isinstance(other, McElieceSecretKey) and self.to_bytes() == other.to_bytes()


def _pad_poly(p: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    out[: len(p)] = p
    return out


def right_inverse_from_columns(n: int, cols: list[int]) -> BitMatrix:
    """n x k matrix X with X[cols[j], j] = 1, so G X = I when G[:, cols] = I."""
    bits = np.zeros((n, len(cols)), dtype=np.uint8)
    bits[cols, np.arange(len(cols))] = 1
    return BitMatrix.from_bits(bits)


def mceliece_keygen(
    params: McElieceParams,
    variant: str = SYSTEMATIC,
    rng: random.Random | None = None,
    ops: OpCounters | None = None,
    threads: int = 1,
) -> tuple[McEliecePublicKey, McElieceSecretKey]:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    rng = rng or rng_from_seed(None)
    goppa, h, gen, free = _generate_code(params, rng, ops)
    n, k = params.n, params.k
    if variant == TEXTBOOK:
        s, s_inv = random_invertible_pair(k, rng, ops)
        perm = Permutation.random(n, rng)
        g_pub = permute_columns(bm_mul(s, gen, ops, threads=threads), perm)
        g_right_inv = right_inverse_from_columns(n, free)
        pk = McEliecePublicKey(params, TEXTBOOK, g_pub)
        return pk, McElieceSecretKey(params, TEXTBOOK, goppa, perm, s_inv, g_right_inv)

    # [I | T] for G P exists iff the last mt columns of H P are independent;
    # eliminate those first and read T off the remaining block.
    order = list(range(k, n)) + list(range(k))
    for _ in range(MAX_SYSTEMATIC_ATTEMPTS):
        perm = Permutation.random(n, rng)
        reduced, pivots, _ = bm_rref(permute_columns(h, perm), ops, col_order=order)
        if pivots == order[: n - k]:
            t_block = reduced.columns(slice(0, k)).transpose()
            return McEliecePublicKey(params, SYSTEMATIC, t_block), McElieceSecretKey(params, SYSTEMATIC, goppa, perm)
    raise RuntimeError(f"no systematic form found in {MAX_SYSTEMATIC_ATTEMPTS} permutations")


def _codeword(pk: McEliecePublicKey, msg: BitVector, ops: OpCounters | None) -> BitVector:
    if pk.variant == TEXTBOOK:
        return bm_vec_mul(msg, pk.matrix, ops)
    tail = bm_vec_mul(msg, pk.matrix, ops)
    return BitVector.from_bits(np.concatenate([msg.to_bits(), tail.to_bits()]))


def mceliece_encrypt(
    pk: McEliecePublicKey,
    msg: BitVector,
    rng: random.Random | None = None,
    ops: OpCounters | None = None,
    error: BitVector | None = None,
) -> BitVector:
    """y = m G' + e with e of weight exactly t (or the supplied ``error``)."""
    p = pk.params
    if msg.length != p.k:
        raise ValueError(f"message must be {p.k} bits, got {msg.length}")
    if error is None:
        error = BitVector.random_weight(p.n, p.t, rng or rng_from_seed(None))
    c = _codeword(pk, msg, ops)
    if ops is not None:
        ops.gf2_word_ops += c.data.size
    return c ^ error


def mceliece_decrypt(sk: McElieceSecretKey, y: BitVector, ops: OpCounters | None = None) -> BitVector:
    p = sk.params
    if y.length != p.n:
        raise ValueError(f"ciphertext must be {p.n} bits, got {y.length}")
    y_unperm = perm_apply(y, sk.perm, inverse=True)
    c_unperm, e_unperm = patterson_decode(sk.goppa, y_unperm, ops)
    if sk.variant == TEXTBOOK:
        m_scrambled = bm_vec_mul(c_unperm, sk.g_right_inv, ops)
        return bm_vec_mul(m_scrambled, sk.s_inv, ops)
    c = y ^ perm_apply(e_unperm, sk.perm)
    return c[: p.k]
