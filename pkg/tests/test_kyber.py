import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqclab import kyber, ring
from pqclab.counters import OpCounters
from pqclab.ring import N, PolyVec, RingElement

ALL = list(kyber.PARAMS.values())
SIZES = {"512": (2, 800, 768), "768": (3, 1184, 1088), "1024": (4, 1568, 1568)}


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_sizes_match_published_table(p):
    k, pk_bytes, ct_bytes = SIZES[p.level]
    assert p.k == k
    pk, sk = kyber.kyber_keygen(p, bytes(32))
    ct = kyber.kyber_encrypt(pk, bytes(32), bytes(32))
    assert len(pk.to_bytes()) == p.pk_bytes == pk_bytes
    assert len(ct.to_bytes()) == p.ct_bytes == ct_bytes


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_serialization_roundtrip(p):
    pk, sk = kyber.kyber_keygen(p, os.urandom(32))
    ct = kyber.kyber_encrypt(pk, os.urandom(32))
    assert kyber.KyberPublicKey.from_bytes(p, pk.to_bytes()) == pk
    assert kyber.KyberSecretKey.from_bytes(p, sk.to_bytes()) == sk
    assert kyber.KyberCiphertext.from_bytes(p, ct.to_bytes()) == ct


def test_malformed_inputs_rejected():
    p = kyber.KYBER512
    pk, _ = kyber.kyber_keygen(p, bytes(32))
    with pytest.raises(ValueError):
        kyber.KyberPublicKey.from_bytes(p, pk.to_bytes()[:-1])
    with pytest.raises(ValueError):
        kyber.KyberCiphertext.from_bytes(p, bytes(767))
    with pytest.raises(ValueError):
        kyber.KyberPublicKey.from_bytes(p, b"\xff" * 800)  # 12-bit values >= q
    with pytest.raises(ValueError):
        kyber.kyber_encrypt(pk, bytes(31))
    with pytest.raises(ValueError):
        kyber.kyber_keygen(p, bytes(16))
    with pytest.raises(ValueError):
        kyber.get_params("2048")


def test_ciphertext_for_other_level_rejected():
    pk, _ = kyber.kyber_keygen(kyber.KYBER512, bytes(32))
    _, sk768 = kyber.kyber_keygen(kyber.KYBER768, bytes(32))
    with pytest.raises(ValueError):
        kyber.kyber_decrypt(sk768, kyber.kyber_encrypt(pk, bytes(32)))


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_roundtrip_random_messages(p):
    pk, sk = kyber.kyber_keygen(p, os.urandom(32))
    for _ in range(50):
        m = os.urandom(32)
        assert kyber.kyber_decrypt(sk, kyber.kyber_encrypt(pk, m)) == m
    assert kyber.kyber_decrypt(sk, kyber.kyber_encrypt(pk, bytes(32))) == bytes(32)


@settings(max_examples=20, deadline=None)
@given(st.binary(min_size=32, max_size=32), st.binary(min_size=32, max_size=32), st.binary(min_size=32, max_size=32))
def test_roundtrip_property(seed, m, coins):
    pk, sk = kyber.kyber_keygen(kyber.KYBER768, seed)
    assert kyber.kyber_decrypt(sk, kyber.kyber_encrypt(pk, m, coins)) == m


def test_determinism():
    p = kyber.KYBER1024
    a = kyber.kyber_keygen(p, b"\x07" * 32)
    b = kyber.kyber_keygen(p, b"\x07" * 32)
    assert a[0].to_bytes() == b[0].to_bytes() and a[1].to_bytes() == b[1].to_bytes()
    m, coins = b"m" * 32, b"c" * 32
    assert kyber.kyber_encrypt(a[0], m, coins).to_bytes() == kyber.kyber_encrypt(b[0], m, coins).to_bytes()


def _zero_vec(k):
    return PolyVec(np.zeros((k, N), dtype=np.int64))


@pytest.mark.parametrize("j", [0, 1, 2])
def test_unit_secret_extracts_matrix_column(j):
    p = kyber.KYBER768
    rho = bytes(range(32))
    s = np.zeros((p.k, N), dtype=np.int64)
    s[j, 0] = 1
    pk, _ = kyber.keygen_from(p, rho, PolyVec(s), _zero_vec(p.k))
    a = ring.expand_matrix(rho, p.k)
    for i in range(p.k):
        assert np.array_equal(pk.t_hat.data[i], a.data[i, j])


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_noise_free_decryption_is_exact(p):
    rng = np.random.default_rng(p.k)
    s = PolyVec(rng.integers(0, ring.Q, (p.k, N)))
    r = PolyVec(rng.integers(0, ring.Q, (p.k, N)))
    pk, sk = kyber.keygen_from(p, os.urandom(32), s, _zero_vec(p.k))
    m = os.urandom(32)
    u, v = kyber.encrypt_raw(pk, m, r, _zero_vec(p.k), RingElement.zero())
    w = v - ring.ntt_inverse(ring.inner(sk.s_hat, ring.ntt_forward(u)))
    assert w == ring.encode_msg(m)
    assert kyber.decrypt_raw(sk, u, v) == m


def test_keygen_mult_count_scales_with_k_squared():
    counts = {}
    for p in ALL:
        ops = OpCounters()
        kyber.kyber_keygen(p, bytes(32), ops)
        counts[p.k] = ops.zq_mults
        assert ops.ntt_transforms == 2 * p.k
    assert all(counts[k] == ring.BASEMUL_MULTS * k * k for k in counts)


def test_matches_fips203_kpke_reference():
    ml_kem = pytest.importorskip("kyber_py.ml_kem")
    refs = {"512": ml_kem.ML_KEM_512, "768": ml_kem.ML_KEM_768, "1024": ml_kem.ML_KEM_1024}
    for p in ALL:
        ref = refs[p.level]
        for _ in range(3):
            d, m, r = os.urandom(32), os.urandom(32), os.urandom(32)
            pk, sk = kyber.kyber_keygen(p, d)
            ek, dk = ref._k_pke_keygen(d)
            assert pk.to_bytes() == ek
            assert sk.to_bytes() == dk
            ct = kyber.kyber_encrypt(pk, m, r)
            assert ct.to_bytes() == ref._k_pke_encrypt(ek, m, r)
            assert ref._k_pke_decrypt(dk, ct.to_bytes()) == m
