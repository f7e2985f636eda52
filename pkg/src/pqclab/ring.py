"""Arithmetic in R_q = Z_q[X]/(X^256 + 1).

Coefficient arrays are ``int64`` numpy arrays whose last axis has length 256,
so the transforms and base multiplications work unchanged on single
polynomials, vectors and matrices. Byte formats follow the ML-KEM (FIPS 203)
conventions: little-endian bit packing, SHAKE-128 matrix expansion and
SHAKE-256 noise streams.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .counters import OpCounters
from .fields import Q, barrett_reduce

N = 256
COEFF = "coefficient"
NTT = "ntt"

ROOT_OF_UNITY = 17  # primitive 256th root of unity mod q
NTT_LAYERS = 7
NTT_BUTTERFLY_MULTS = 128 * NTT_LAYERS
INV_128 = pow(128, -1, Q)  # 3303
BASEMUL_MULTS = 5 * (N // 2)
BASEMUL_ADDS = 2 * (N // 2)
MSG_BYTES = 32
SEED_BYTES = 32
MAX_REJECTIONS = 10**6


def _bitrev7(i: int) -> int:
    return int(f"{i:07b}"[::-1], 2)


ZETAS = np.array([pow(ROOT_OF_UNITY, _bitrev7(i), Q) for i in range(128)], dtype=np.int64)
GAMMAS = np.array([pow(ROOT_OF_UNITY, 2 * _bitrev7(i) + 1, Q) for i in range(128)], dtype=np.int64)


class DomainError(ValueError):
    """Operands carry the wrong or mismatched domain tag."""


class StreamExhausted(ValueError):
    pass


@dataclass(eq=False)
class RingElement:
    coeffs: np.ndarray
    domain: str = COEFF

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.int64)
        if self.coeffs.shape != (N,):
            raise ValueError(f"ring element needs {N} coefficients, got shape {self.coeffs.shape}")
        if self.domain not in (COEFF, NTT):
            raise DomainError(f"unknown domain tag {self.domain!r}")

    @classmethod
    def zero(cls, domain: str = COEFF) -> RingElement:
        return cls(np.zeros(N, dtype=np.int64), domain)

    @classmethod
    def from_list(cls, values, domain: str = COEFF) -> RingElement:
        return cls(np.asarray(values, dtype=np.int64) % Q, domain)

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.coeffs, other.coeffs)

    def __add__(self, other: RingElement) -> RingElement:
        _same_domain(self, other)
        return RingElement(barrett_reduce(self.coeffs + other.coeffs), self.domain)

    def __sub__(self, other: RingElement) -> RingElement:
        _same_domain(self, other)
        return RingElement(barrett_reduce(self.coeffs - other.coeffs + Q), self.domain)

    def __mul__(self, other: RingElement) -> RingElement:
        return poly_mul(self, other)


@dataclass(eq=False)
class PolyVec:
    """k ring elements sharing one domain tag, stored as a (k, 256) array."""

    data: np.ndarray
    domain: str = COEFF

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.int64)
        if self.data.ndim != 2 or self.data.shape[1] != N:
            raise ValueError(f"poly vector needs shape (k, {N}), got {self.data.shape}")

    @property
    def k(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, i: int) -> RingElement:
        return RingElement(self.data[i].copy(), self.domain)

    def __len__(self) -> int:
        return self.k

    def __eq__(self, other):
        if not isinstance(other, PolyVec):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.data, other.data)

    def __add__(self, other: PolyVec) -> PolyVec:
        _same_domain(self, other)
        return PolyVec(barrett_reduce(self.data + other.data), self.domain)

    @classmethod
    def of(cls, elems: list[RingElement]) -> PolyVec:
        domains = {e.domain for e in elems}
        if len(domains) != 1:
            raise DomainError("poly vector entries must share a domain")
        return cls(np.stack([e.coeffs for e in elems]), domains.pop())


@dataclass(eq=False)
class PolyMatrix:
    """k x k ring elements, stored as a (k, k, 256) array."""

    data: np.ndarray
    domain: str = NTT

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.int64)
        if self.data.ndim != 3 or self.data.shape[0] != self.data.shape[1] or self.data.shape[2] != N:
            raise ValueError(f"poly matrix needs shape (k, k, {N}), got {self.data.shape}")

    @property
    def k(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, ij: tuple[int, int]) -> RingElement:
        return RingElement(self.data[ij].copy(), self.domain)

    def transpose(self) -> PolyMatrix:
        return PolyMatrix(self.data.transpose(1, 0, 2).copy(), self.domain)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.data, other.data)


def _same_domain(a, b) -> None:
    if a.domain != b.domain:
        raise DomainError(f"domain mismatch: {a.domain} vs {b.domain}")


# ---------------------------------------------------------------------------
# NTT


def _ntt(a: np.ndarray) -> np.ndarray:
    f = a.copy()
    lead = f.shape[:-1]
    k = 1
    length = 128
    while length >= 2:
        blocks = N // (2 * length)
        view = f.reshape(*lead, blocks, 2, length)
        zeta = ZETAS[k : k + blocks].reshape(blocks, 1)
        k += blocks
        t = barrett_reduce(zeta * view[..., 1, :])
        hi = barrett_reduce(view[..., 0, :] - t + Q)
        view[..., 0, :] = barrett_reduce(view[..., 0, :] + t)
        view[..., 1, :] = hi
        length //= 2
    return f


def _ntt_inv(a: np.ndarray) -> np.ndarray:
    f = a.copy()
    lead = f.shape[:-1]
    k = 127
    length = 2
    while length <= 128:
        blocks = N // (2 * length)
        view = f.reshape(*lead, blocks, 2, length)
        # zetas are consumed in descending order across blocks
        zeta = ZETAS[k - blocks + 1 : k + 1][::-1].reshape(blocks, 1)
        k -= blocks
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] = barrett_reduce(lo + hi)
        view[..., 1, :] = barrett_reduce(zeta * barrett_reduce(hi - lo + Q))
        length *= 2
    return barrett_reduce(f * INV_128)


def _count_transforms(ops: OpCounters | None, arr: np.ndarray) -> None:
    if ops is not None:
        ops.ntt_transforms += int(np.prod(arr.shape[:-1], dtype=np.int64))


def ntt_forward(p, ops: OpCounters | None = None):
    """Forward 7-layer NTT of a RingElement or PolyVec (coefficient -> ntt)."""
    if p.domain != COEFF:
        raise DomainError("forward NTT expects a coefficient-domain input")
    arr = p.coeffs if isinstance(p, RingElement) else p.data
    _count_transforms(ops, arr)
    out = _ntt(arr)
    return RingElement(out, NTT) if isinstance(p, RingElement) else PolyVec(out, NTT)


def ntt_inverse(p, ops: OpCounters | None = None):
    """Inverse NTT including the 1/128 scaling (ntt -> coefficient)."""
    if p.domain != NTT:
        raise DomainError("inverse NTT expects an ntt-domain input")
    arr = p.coeffs if isinstance(p, RingElement) else p.data
    _count_transforms(ops, arr)
    out = _ntt_inv(arr)
    return RingElement(out, COEFF) if isinstance(p, RingElement) else PolyVec(out, COEFF)


def basemul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product of NTT-domain arrays: 128 products in Z_q[X]/(X^2 - gamma_i)."""
    a0, a1 = a[..., 0::2], a[..., 1::2]
    b0, b1 = b[..., 0::2], b[..., 1::2]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    out[..., 0::2] = barrett_reduce(a0 * b0 + barrett_reduce(barrett_reduce(a1 * b1) * GAMMAS))
    out[..., 1::2] = barrett_reduce(a0 * b1 + a1 * b0)
    return out


def schoolbook_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """O(n^2) negacyclic convolution of two coefficient arrays."""
    full = np.convolve(a, b)
    out = full[:N].copy()
    out[: N - 1] -= full[N:]
    return out % Q


def poly_mul(a: RingElement, b: RingElement, ops: OpCounters | None = None) -> RingElement:
    """Product in R_q: basemul when tagged ntt, schoolbook when tagged coefficient."""
    _same_domain(a, b)
    if a.domain == NTT:
        if ops is not None:
            ops.zq_mults += BASEMUL_MULTS
            ops.zq_adds += BASEMUL_ADDS
        return RingElement(basemul(a.coeffs, b.coeffs), NTT)
    if ops is not None:
        ops.zq_mults += N * N
        ops.zq_adds += N * N
    return RingElement(schoolbook_mul(a.coeffs, b.coeffs), COEFF)


def matvec(a: PolyMatrix, v: PolyVec, ops: OpCounters | None = None) -> PolyVec:
    """A o v in the NTT domain: row i is sum_j A[i][j] * v[j]."""
    if a.domain != NTT or v.domain != NTT:
        raise DomainError("matrix-vector products run in the ntt domain")
    k = a.k
    prods = basemul(a.data, v.data[np.newaxis, :, :])
    if ops is not None:
        ops.zq_mults += k * k * BASEMUL_MULTS
        ops.zq_adds += k * k * BASEMUL_ADDS + k * (k - 1) * N
    return PolyVec(prods.sum(axis=1) % Q, NTT)


def inner(a: PolyVec, b: PolyVec, ops: OpCounters | None = None) -> RingElement:
    """a^T o b in the NTT domain."""
    if a.domain != NTT or b.domain != NTT:
        raise DomainError("inner products run in the ntt domain")
    k = a.k
    if ops is not None:
        ops.zq_mults += k * BASEMUL_MULTS
        ops.zq_adds += k * BASEMUL_ADDS + (k - 1) * N
    return RingElement(basemul(a.data, b.data).sum(axis=0) % Q, NTT)


# ---------------------------------------------------------------------------
# sampling


def prf(sigma: bytes, nonce: int, eta: int) -> bytes:
    return hashlib.shake_256(sigma + bytes([nonce])).digest(64 * eta)


def _take(stream: bytes | BinaryIO, count: int) -> bytes:
    if hasattr(stream, "read"):
        buf = stream.read(count)
    else:
        buf = bytes(stream[:count])
    if len(buf) < count:
        raise StreamExhausted(f"needed {count} bytes, stream supplied {len(buf)}")
    return buf


def cbd_sample(stream: bytes | BinaryIO, eta: int, ops: OpCounters | None = None) -> RingElement:
    """Centered binomial sample: popcount of eta bits minus popcount of the next eta."""
    if eta not in (2, 3):
        raise ValueError("eta must be 2 or 3")
    buf = _take(stream, 64 * eta)
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little").astype(np.int64)
    pairs = bits.reshape(N, 2, eta).sum(axis=2)
    if ops is not None:
        ops.zq_adds += N * (2 * eta - 1)
    return RingElement((pairs[:, 0] - pairs[:, 1]) % Q, COEFF)


def _rejection_sample(seed: bytes) -> np.ndarray:
    out = np.empty(N, dtype=np.int64)
    filled = 0
    rejected = 0
    length = 3 * 168  # four SHAKE-128 blocks covers the common case
    pos = 0
    xof = hashlib.shake_128(seed)
    buf = xof.digest(length)
    while filled < N:
        if pos + 3 > len(buf):
            length *= 2
            buf = xof.digest(length)
        b0, b1, b2 = buf[pos], buf[pos + 1], buf[pos + 2]
        pos += 3
        for d in (b0 | ((b1 & 0x0F) << 8), (b1 >> 4) | (b2 << 4)):
            if d < Q and filled < N:
                out[filled] = d
                filled += 1
            elif d >= Q:
                rejected += 1
                if rejected > MAX_REJECTIONS:
                    raise RuntimeError("matrix expansion exceeded the rejection cap")
    return out


def expand_matrix(rho: bytes, k: int, transpose: bool = False) -> PolyMatrix:
    """Deterministic NTT-domain matrix: entry (i, j) from SHAKE-128(rho || j || i)."""
    if len(rho) != SEED_BYTES:
        raise ValueError("rho must be 32 bytes")
    if k not in (2, 3, 4):
        raise ValueError("module rank must be 2, 3 or 4")
    data = np.empty((k, k, N), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            entry = _rejection_sample(rho + bytes([j, i]))
            if transpose:
                data[j, i] = entry
            else:
                data[i, j] = entry
    return PolyMatrix(data, NTT)


# ---------------------------------------------------------------------------
# encodings


def pack_bits(values: np.ndarray, d: int) -> bytes:
    """Little-endian packing of d-bit values (FIPS 203 ByteEncode_d)."""
    v = np.asarray(values, dtype=np.int64).reshape(-1)
    bits = ((v[:, np.newaxis] >> np.arange(d)) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def unpack_bits(data: bytes, d: int, count: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[: count * d]
    if bits.size < count * d:
        raise ValueError("not enough bytes to unpack")
    return (bits.reshape(count, d).astype(np.int64) << np.arange(d)).sum(axis=1)


def compress_coeffs(c: np.ndarray, d: int) -> np.ndarray:
    """round(2^d * c / q) mod 2^d, rounding halves up."""
    return ((c << (d + 1)) + Q) // (2 * Q) & ((1 << d) - 1)


def decompress_coeffs(x: np.ndarray, d: int) -> np.ndarray:
    """round(q * x / 2^d)."""
    return (Q * x * 2 + (1 << d)) >> (d + 1)


COMPRESS_WIDTHS = (1, 4, 5, 10, 11, 12)


def compress(p, d: int, ops: OpCounters | None = None) -> bytes:
    """Compress a coefficient-domain RingElement or PolyVec to d bits per coefficient."""
    if d not in COMPRESS_WIDTHS:
        raise ValueError(f"unsupported compression width {d}")
    if p.domain != COEFF:
        raise DomainError("compression applies to coefficient-domain values")
    arr = p.coeffs if isinstance(p, RingElement) else p.data
    if ops is not None:
        ops.zq_mults += arr.size
    return pack_bits(compress_coeffs(arr, d), d)


def decompress(data: bytes, d: int, k: int | None = None, ops: OpCounters | None = None):
    """Inverse of ``compress``; returns a PolyVec when ``k`` is given."""
    if d not in COMPRESS_WIDTHS:
        raise ValueError(f"unsupported compression width {d}")
    count = N * (k or 1)
    if len(data) != count * d // 8:
        raise ValueError(f"expected {count * d // 8} bytes, got {len(data)}")
    vals = decompress_coeffs(unpack_bits(data, d, count), d)
    if ops is not None:
        ops.zq_mults += count
    if k is None:
        return RingElement(vals, COEFF)
    return PolyVec(vals.reshape(k, N), COEFF)


def encode_msg(m: bytes) -> RingElement:
    """Bit i of the message becomes coefficient i, scaled to 0 or ceil(q/2)."""
    if len(m) != MSG_BYTES:
        raise ValueError("messages are exactly 32 bytes")
    bits = np.unpackbits(np.frombuffer(m, dtype=np.uint8), bitorder="little").astype(np.int64)
    return RingElement(bits * ((Q + 1) // 2), COEFF)


def decode_msg(p: RingElement) -> bytes:
    if p.domain != COEFF:
        raise DomainError("message decoding expects a coefficient-domain element")
    bits = compress_coeffs(p.coeffs, 1).astype(np.uint8)
    return np.packbits(bits, bitorder="little").tobytes()
