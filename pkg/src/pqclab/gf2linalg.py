"""Bit-packed linear algebra over GF(2).

Rows are packed little-endian into ``uint8`` words: bit j of a row lives in
byte j // 8 at position j % 8, and pad bits past ``cols`` are always zero.
``data.tobytes()`` is therefore the row-major, byte-padded wire format.
Word-operation tallies count one op per byte XORed or ANDed.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .counters import OpCounters


class Singular(ValueError):
    """Matrix is not invertible over GF(2)."""


def _words(bits: int) -> int:
    return (bits + 7) // 8


def _pad_mask(cols: int) -> int:
    rem = cols % 8
    return 0xFF if rem == 0 else (1 << rem) - 1


def _pack(bits: np.ndarray) -> np.ndarray:
    return np.packbits(np.asarray(bits, dtype=np.uint8), axis=-1, bitorder="little")


def _unpack(data: np.ndarray, count: int) -> np.ndarray:
    return np.unpackbits(data, axis=-1, count=count, bitorder="little")


@dataclass(eq=False)
class BitMatrix:
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("bit matrices need positive dimensions")
        if self.data.shape != (self.rows, _words(self.cols)) or self.data.dtype != np.uint8:
            raise ValueError("packed data has the wrong shape or dtype")

    @property
    def words(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols, np.zeros((rows, _words(cols)), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_bits(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_bits(cls, bits) -> BitMatrix:
        bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8) & 1)
        return cls(bits.shape[0], bits.shape[1], _pack(bits))

    @classmethod
    def random(cls, rows: int, cols: int, rng: random.Random) -> BitMatrix:
        w = _words(cols)
        data = np.frombuffer(rng.randbytes(rows * w), dtype=np.uint8).reshape(rows, w).copy()
        data[:, -1] &= _pad_mask(cols)
        return cls(rows, cols, data)

    @classmethod
    def from_bytes(cls, rows: int, cols: int, raw: bytes) -> BitMatrix:
        w = _words(cols)
        if len(raw) != rows * w:
            raise ValueError(f"expected {rows * w} bytes for a {rows}x{cols} matrix, got {len(raw)}")
        data = np.frombuffer(raw, dtype=np.uint8).reshape(rows, w).copy()
        if np.any(data[:, -1] & ~np.uint8(_pad_mask(cols))):
            raise ValueError("nonzero pad bits in packed matrix")
        return cls(rows, cols, data)

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def to_bits(self) -> np.ndarray:
        return _unpack(self.data, self.cols)

    def copy(self) -> BitMatrix:
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def get(self, i: int, j: int) -> int:
        return int(self.data[i, j >> 3] >> (j & 7)) & 1

    def column(self, j: int) -> np.ndarray:
        return (self.data[:, j >> 3] >> (j & 7)) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i].copy())

    def transpose(self) -> BitMatrix:
        return BitMatrix.from_bits(self.to_bits().T)

    def columns(self, idx) -> BitMatrix:
        return BitMatrix.from_bits(self.to_bits()[:, idx])

    def hstack(self, other: BitMatrix) -> BitMatrix:
        if self.rows != other.rows:
            raise ValueError("row counts differ")
        if self.cols % 8 == 0:
            return BitMatrix(self.rows, self.cols + other.cols, np.hstack([self.data, other.data]))
        return BitMatrix.from_bits(np.hstack([self.to_bits(), other.to_bits()]))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


@dataclass(eq=False)
class BitVector:
    length: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (_words(self.length),) or self.data.dtype != np.uint8:
            raise ValueError("packed data has the wrong shape or dtype")

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length, np.zeros(_words(length), dtype=np.uint8))

    @classmethod
    def from_bits(cls, bits) -> BitVector:
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1) & 1
        return cls(bits.size, _pack(bits))

    @classmethod
    def from_bytes(cls, length: int, raw: bytes) -> BitVector:
        if len(raw) != _words(length):
            raise ValueError(f"expected {_words(length)} bytes for {length} bits, got {len(raw)}")
        data = np.frombuffer(raw, dtype=np.uint8).copy()
        if length % 8 and data[-1] & ~np.uint8(_pad_mask(length)):
            raise ValueError("nonzero pad bits in packed vector")
        return cls(length, data)

    @classmethod
    def random(cls, length: int, rng: random.Random) -> BitVector:
        data = np.frombuffer(rng.randbytes(_words(length)), dtype=np.uint8).copy()
        data[-1] &= _pad_mask(length)
        return cls(length, data)

    @classmethod
    def random_weight(cls, length: int, weight: int, rng: random.Random) -> BitVector:
        bits = np.zeros(length, dtype=np.uint8)
        bits[rng.sample(range(length), weight)] = 1
        return cls.from_bits(bits)

    def to_bytes(self) -> bytes:
        return self.data.tobytes()

    def to_bits(self) -> np.ndarray:
        return _unpack(self.data, self.length)

    def weight(self) -> int:
        return int(np.bitwise_count(self.data).sum())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.to_bits())

    def __xor__(self, other: BitVector) -> BitVector:
        if self.length != other.length:
            raise ValueError("vector lengths differ")
        return BitVector(self.length, self.data ^ other.data)

    def __getitem__(self, idx) -> BitVector:
        return BitVector.from_bits(self.to_bits()[idx])

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"BitVector({self.length}, weight={self.weight()})"


# ---------------------------------------------------------------------------
# products


def _mul_rows(a_bits: np.ndarray, b: BitMatrix, ops: OpCounters) -> np.ndarray:
    out = np.zeros((a_bits.shape[0], b.words), dtype=np.uint8)
    for i, row in enumerate(a_bits):
        sel = np.flatnonzero(row)
        if sel.size:
            out[i] = np.bitwise_xor.reduce(b.data[sel], axis=0)
            ops.gf2_word_ops += int(sel.size) * b.words
    return out


def bm_mul(a: BitMatrix, b: BitMatrix, ops: OpCounters | None = None, threads: int = 1) -> BitMatrix:
    """a * b over GF(2) by XOR-accumulating rows of b.

    With ``threads > 1`` output rows are split into contiguous blocks computed
    concurrently; each block keeps its own tallies, merged after the join.
    """
    if a.cols != b.rows:
        raise ValueError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    a_bits = a.to_bits()
    if threads <= 1 or a.rows < 2 * threads:
        local = OpCounters()
        data = _mul_rows(a_bits, b, local)
        parts = [local]
    else:
        bounds = np.linspace(0, a.rows, threads + 1).astype(int)
        chunks = [a_bits[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]
        parts = [OpCounters() for _ in chunks]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda c: _mul_rows(c[0], b, c[1]), zip(chunks, parts)))
        data = np.vstack(blocks)
    if ops is not None:
        for part in parts:
            ops.merge(part)
    return BitMatrix(a.rows, b.cols, data)


def bm_vec_mul(v: BitVector, m: BitMatrix, ops: OpCounters | None = None) -> BitVector:
    """v * m: XOR of the rows selected by v."""
    if v.length != m.rows:
        raise ValueError(f"vector of length {v.length} cannot multiply a {m.rows}-row matrix")
    sel = np.flatnonzero(v.to_bits())
    if ops is not None:
        ops.gf2_word_ops += int(sel.size) * m.words
    if sel.size == 0:
        return BitVector.zeros(m.cols)
    return BitVector(m.cols, np.bitwise_xor.reduce(m.data[sel], axis=0))


def bm_mul_vec(m: BitMatrix, v: BitVector, ops: OpCounters | None = None) -> BitVector:
    """m * v^T: one parity per row (AND then popcount)."""
    if v.length != m.cols:
        raise ValueError("dimension mismatch")
    if ops is not None:
        ops.gf2_word_ops += m.rows * m.words
    parity = np.bitwise_count(m.data & v.data).sum(axis=1) & 1
    return BitVector.from_bits(parity)


# ---------------------------------------------------------------------------
# elimination


def _eliminate(data: np.ndarray, cols: int, order, ops: OpCounters | None, stop_rows: int | None = None):
    """In-place Gauss-Jordan elimination; returns the pivot columns.

    Columns are visited in ``order``; the pivot row is the topmost remaining
    row with a one in the column.
    """
    rows, words = data.shape
    limit = rows if stop_rows is None else stop_rows
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == limit:
            break
        byte, shift = c >> 3, c & 7
        colbits = (data[:, byte] >> shift) & 1
        cand = np.flatnonzero(colbits[r:])
        if cand.size == 0:
            continue
        p = r + int(cand[0])
        if p != r:
            data[[r, p]] = data[[p, r]]
            colbits[[r, p]] = colbits[[p, r]]
        colbits[r] = 0
        targets = np.flatnonzero(colbits)
        if targets.size:
            data[targets] ^= data[r]
            if ops is not None:
                ops.gf2_word_ops += int(targets.size) * words
        pivots.append(c)
        r += 1
    return pivots


def bm_rref(m: BitMatrix, ops: OpCounters | None = None, col_order=None) -> tuple[BitMatrix, list[int], int]:
    """Reduced row-echelon form, pivot columns and rank.

    ``col_order`` changes which columns are tried for pivots first (used to
    force an identity onto a chosen column block); the default is left to right.
    """
    data = m.data.copy()
    order = range(m.cols) if col_order is None else col_order
    pivots = _eliminate(data, m.cols, order, ops)
    return BitMatrix(m.rows, m.cols, data), pivots, len(pivots)


def bm_rank(m: BitMatrix, ops: OpCounters | None = None) -> int:
    return bm_rref(m, ops)[2]


def bm_invert(m: BitMatrix, ops: OpCounters | None = None) -> BitMatrix:
    """Inverse through elimination of [M | I]."""
    if m.rows != m.cols:
        raise ValueError("only square matrices are invertible")
    n = m.rows
    aug = m.hstack(BitMatrix.identity(n))
    pivots = _eliminate(aug.data, aug.cols, range(n), ops)
    if len(pivots) < n:
        raise Singular(f"matrix has rank {len(pivots)} < {n}")
    return aug.columns(slice(n, 2 * n))


def random_invertible(dim: int, rng: random.Random, ops: OpCounters | None = None) -> BitMatrix:
    """Uniform invertible matrix by rejection sampling on the rank."""
    return random_invertible_pair(dim, rng, ops)[0]


def random_invertible_pair(
    dim: int, rng: random.Random, ops: OpCounters | None = None
) -> tuple[BitMatrix, BitMatrix]:
    """(S, S^-1) for a uniform invertible S; the inverse is a by-product of the rank test."""
    while True:
        s = BitMatrix.random(dim, dim, rng)
        try:
            return s, bm_invert(s, ops)
        except Singular:
            continue


def null_space(h: BitMatrix, ops: OpCounters | None = None) -> tuple[BitMatrix, list[int]]:
    """Basis of {x : h x^T = 0} as rows, plus the free columns.

    Each basis row has a one in exactly one free column (so the basis restricted
    to the free columns is the identity).
    """
    r, pivots, rank = bm_rref(h, ops)
    pivot_set = set(pivots)
    free = [c for c in range(h.cols) if c not in pivot_set]
    bits = np.zeros((len(free), h.cols), dtype=np.uint8)
    bits[np.arange(len(free)), free] = 1
    if rank:
        rbits = r.to_bits()[:rank]
        bits[:, pivots] = rbits[:, free].T
    return BitMatrix.from_bits(bits), free


# ---------------------------------------------------------------------------
# permutations


@dataclass(eq=False)
class Permutation:
    """Coordinate map i -> map[i]; as a matrix, P[i, map[i]] = 1 so (v P)[map[i]] = v[i]."""

    map: np.ndarray

    def __post_init__(self):
        self.map = np.asarray(self.map, dtype=np.int64)
        n = self.map.size
        if not np.array_equal(np.sort(self.map), np.arange(n)):
            raise ValueError("permutation map must be a bijection on range(n)")

    def __len__(self) -> int:
        return self.map.size

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.map, other.map)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> Permutation:
        idx = list(range(n))
        rng.shuffle(idx)
        return cls(np.array(idx))

    def inverse(self) -> Permutation:
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.map.size)
        return Permutation(inv)

    def then(self, other: Permutation) -> Permutation:
        """Apply self, then other."""
        return Permutation(other.map[self.map])

    def to_matrix(self) -> BitMatrix:
        n = self.map.size
        bits = np.zeros((n, n), dtype=np.uint8)
        bits[np.arange(n), self.map] = 1
        return BitMatrix.from_bits(bits)


def perm_apply(v: BitVector, p: Permutation, inverse: bool = False) -> BitVector:
    """v P, or v P^-1 when ``inverse``."""
    if v.length != len(p):
        raise ValueError("vector and permutation lengths differ")
    bits = v.to_bits()
    out = np.empty_like(bits)
    if inverse:
        out[:] = bits[p.map]
    else:
        out[p.map] = bits
    return BitVector.from_bits(out)


def permute_columns(m: BitMatrix, p: Permutation, inverse: bool = False) -> BitMatrix:
    """M P (or M P^-1): column i of M moves to column map[i]."""
    if m.cols != len(p):
        raise ValueError("matrix width and permutation length differ")
    bits = m.to_bits()
    if inverse:
        return BitMatrix.from_bits(bits[:, p.map])
    out = np.empty_like(bits)
    out[:, p.map] = bits
    return BitMatrix.from_bits(out)
