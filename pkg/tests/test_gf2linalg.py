import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqclab import gf2linalg as la
from pqclab.counters import OpCounters
from pqclab.gf2linalg import BitMatrix, BitVector, Permutation


def naive_mul(a, b):
    rows, inner = len(a), len(b)
    cols = len(b[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0
            for t in range(inner):
                acc ^= a[i][t] & b[t][j]
            out[i][j] = acc
    return out


def rowspace_rank(bits):
    """log2 of the number of distinct XOR combinations of the rows."""
    rows = [int("".join(map(str, r)), 2) for r in bits]
    span = set()
    for mask in range(1 << len(rows)):
        acc = 0
        for i, r in enumerate(rows):
            if mask >> i & 1:
                acc ^= r
        span.add(acc)
    return int(math.log2(len(span)))


def naive_rref(bits):
    m = [list(r) for r in bits]
    rows, cols = len(m), len(m[0])
    r, pivots = 0, []
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(rows):
            if i != r and m[i][c]:
                m[i] = [x ^ y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def bit_matrices(max_rows=12, max_cols=12):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_packing_roundtrip_and_pad_bits():
    rng = random.Random(0)
    for cols in (1, 7, 8, 9, 17):
        m = BitMatrix.random(5, cols, rng)
        assert BitMatrix.from_bytes(5, cols, m.to_bytes()) == m
        assert np.all(m.data[:, -1] & ~np.uint8(la._pad_mask(cols)) == 0)
    with pytest.raises(ValueError):
        BitMatrix.from_bytes(1, 3, b"\xff")
    with pytest.raises(ValueError):
        BitVector.from_bytes(3, b"\x08")


def test_mul_identities():
    rng = random.Random(1)
    m = BitMatrix.random(10, 13, rng)
    assert la.bm_mul(BitMatrix.identity(10), m) == m
    assert la.bm_mul(m, BitMatrix.zeros(13, 4)).is_zero()
    with pytest.raises(ValueError):
        la.bm_mul(m, m)


def test_mul_8x8_against_naive():
    rng = np.random.default_rng(2)
    for _ in range(200):
        a, b = rng.integers(0, 2, (8, 8)), rng.integers(0, 2, (8, 8))
        got = la.bm_mul(BitMatrix.from_bits(a), BitMatrix.from_bits(b)).to_bits()
        assert got.tolist() == naive_mul(a.tolist(), b.tolist())


@settings(max_examples=200, deadline=None)
@given(bit_matrices(), st.integers(1, 12), st.integers(0, 2**32))
def test_mul_property(a, cols, seed):
    b = np.random.default_rng(seed).integers(0, 2, (len(a[0]), cols))
    got = la.bm_mul(BitMatrix.from_bits(a), BitMatrix.from_bits(b)).to_bits()
    assert got.tolist() == naive_mul(a, b.tolist())


@pytest.mark.parametrize("threads", [2, 3, 4, 7])
def test_parallel_mul_is_bit_identical(threads):
    rng = random.Random(threads)
    a, b = BitMatrix.random(97, 150, rng), BitMatrix.random(150, 61, rng)
    seq_ops, par_ops = OpCounters(), OpCounters()
    assert la.bm_mul(a, b, seq_ops) == la.bm_mul(a, b, par_ops, threads=threads)
    assert seq_ops == par_ops


def test_vec_mul():
    rng = random.Random(3)
    m = BitMatrix.random(9, 20, rng)
    assert la.bm_vec_mul(BitVector.zeros(9), m) == BitVector.zeros(20)
    for i in range(9):
        e = np.zeros(9, dtype=np.uint8)
        e[i] = 1
        assert la.bm_vec_mul(BitVector.from_bits(e), m) == m.row(i)
    for _ in range(50):
        v = BitVector.random(9, rng)
        want = naive_mul([v.to_bits().tolist()], m.to_bits().tolist())[0]
        assert la.bm_vec_mul(v, m).to_bits().tolist() == want
    v = BitVector.random(20, rng)
    want_t = [row[0] for row in naive_mul(m.to_bits().tolist(), [[b] for b in v.to_bits().tolist()])]
    assert la.bm_mul_vec(m, v).to_bits().tolist() == want_t


def test_rref_basics():
    r, pivots, rank = la.bm_rref(BitMatrix.identity(6))
    assert r == BitMatrix.identity(6) and pivots == list(range(6)) and rank == 6
    assert la.bm_rank(BitMatrix.zeros(4, 5)) == 0


def test_rank_8x8_against_rowspace_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(100):
        # low-rank products make the check meaningful
        r = int(rng.integers(1, 9))
        bits = (rng.integers(0, 2, (8, r)) @ rng.integers(0, 2, (r, 8))) % 2
        assert la.bm_rank(BitMatrix.from_bits(bits)) == rowspace_rank(bits.tolist())


def test_rank_20x20_against_rowspace_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(3):
        bits = (rng.integers(0, 2, (20, 14)) @ rng.integers(0, 2, (14, 20))) % 2
        # 2^20 row combinations, enumerated with numpy
        packed = np.array([int("".join(map(str, r)), 2) for r in bits], dtype=np.int64)
        span = np.zeros(1, dtype=np.int64)
        for r in packed:
            span = np.unique(np.concatenate([span, span ^ r]))
        assert la.bm_rank(BitMatrix.from_bits(bits)) == int(np.log2(span.size))


@settings(max_examples=200, deadline=None)
@given(bit_matrices())
def test_rref_matches_naive_and_is_idempotent(bits):
    m = BitMatrix.from_bits(bits)
    r, pivots, rank = la.bm_rref(m)
    want, want_pivots = naive_rref(bits)
    assert r.to_bits().tolist() == want
    assert pivots == want_pivots and rank == len(pivots)
    assert la.bm_rref(r)[0] == r


def test_invert():
    assert la.bm_invert(BitMatrix.identity(5)) == BitMatrix.identity(5)
    rng = random.Random(6)
    m = la.random_invertible(64, rng)
    assert la.bm_mul(m, la.bm_invert(m)) == BitMatrix.identity(64)
    with pytest.raises(la.Singular):
        la.bm_invert(BitMatrix.from_bits([[1, 1], [1, 1]]))


def test_random_invertible():
    rng = random.Random(7)
    assert la.random_invertible(1, rng) == BitMatrix.from_bits([[1]])
    s, s_inv = la.random_invertible_pair(30, rng)
    assert la.bm_mul(s, s_inv) == BitMatrix.identity(30)


def test_invertible_acceptance_rate():
    rng = random.Random(8)
    trials = 4000
    hits = sum(la.bm_rank(BitMatrix.random(12, 12, rng)) == 12 for _ in range(trials))
    expected = math.prod(1 - 2.0**-i for i in range(1, 13))
    assert abs(expected - 0.2888) < 1e-3
    # binomial sd is about 0.007
    assert abs(hits / trials - expected) < 0.03


def test_null_space():
    rng = random.Random(9)
    for _ in range(20):
        h = BitMatrix.random(6, 15, rng)
        g, free = la.null_space(h)
        assert g.rows == 15 - la.bm_rank(h)
        assert la.bm_mul(g, h.transpose()).is_zero()
        assert g.columns(free) == BitMatrix.identity(len(free))


def test_permutation_semantics():
    rng = random.Random(10)
    n = 16
    p = Permutation.random(n, rng)
    v = BitVector.random(n, rng)
    assert la.perm_apply(v, Permutation.identity(n)) == v
    assert la.perm_apply(la.perm_apply(v, p), p, inverse=True) == v
    assert la.perm_apply(v, p) == la.bm_vec_mul(v, p.to_matrix())
    assert la.perm_apply(v, p, inverse=True) == la.bm_vec_mul(v, la.bm_invert(p.to_matrix()))
    q = Permutation.random(n, rng)
    assert la.perm_apply(v, p.then(q)) == la.perm_apply(la.perm_apply(v, p), q)
    assert p.then(p.inverse()) == Permutation.identity(n)
    m = BitMatrix.random(5, n, rng)
    assert la.permute_columns(m, p) == la.bm_mul(m, p.to_matrix())
    with pytest.raises(ValueError):
        la.perm_apply(BitVector.zeros(3), p)
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 1]))


def test_exhaustive_16bit_permutation_cases():
    rng = random.Random(11)
    p = Permutation.random(16, rng)
    pm = p.to_matrix()
    for x in range(0, 1 << 16, 97):
        v = BitVector.from_bits([(x >> i) & 1 for i in range(16)])
        assert la.perm_apply(v, p) == la.bm_vec_mul(v, pm)


def test_random_weight():
    rng = random.Random(12)
    for w in (0, 1, 5, 40):
        assert BitVector.random_weight(40, w, rng).weight() == w


def test_word_op_counting():
    ops = OpCounters()
    a = BitMatrix.identity(16)
    la.bm_mul(a, a, ops)
    assert ops.gf2_word_ops == 16 * 2  # one selected row per output row, 2 byte-words each


def test_bulk_oracle_equivalence_small_cases():
    """Packed products, vector products and ranks agree with per-bit oracles on many small cases."""
    rng = np.random.default_rng(13)
    for _ in range(2000):
        r, c, k = (int(x) for x in rng.integers(1, 9, 3))
        a = rng.integers(0, 2, (r, c))
        b = rng.integers(0, 2, (c, k))
        assert np.array_equal(la.bm_mul(BitMatrix.from_bits(a), BitMatrix.from_bits(b)).to_bits(), (a @ b) % 2)
        assert la.bm_rank(BitMatrix.from_bits(a)) == rowspace_rank(a.tolist())
