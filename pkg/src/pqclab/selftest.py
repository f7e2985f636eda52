"""Toy-scale known-answer and oracle checks run by ``pqclab selftest``."""

from __future__ import annotations

import itertools
import time
from typing import Callable

import numpy as np

from . import costmodel, fields, gf2linalg, kyber, mceliece, ring


class CheckFailed(AssertionError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CheckFailed(msg)


def _check_constants() -> None:
    want = [pow(ring.ROOT_OF_UNITY, ring._bitrev7(i), fields.Q) for i in range(128)]
    _require(ring.ZETAS.tolist() == want, "NTT twiddle table corrupted")
    want = [pow(ring.ROOT_OF_UNITY, 2 * ring._bitrev7(i) + 1, fields.Q) for i in range(128)]
    _require(ring.GAMMAS.tolist() == want, "basemul twiddle table corrupted")
    _require(ring.INV_128 * 128 % fields.Q == 1, "NTT scaling constant corrupted")
    _require(pow(ring.ROOT_OF_UNITY, 128, fields.Q) == fields.Q - 1, "root of unity is not primitive")
    for m, p in fields.REDUCTION_POLYS.items():
        _require(p == fields.least_irreducible(m), f"reduction polynomial for m={m} corrupted")


def _check_ntt_oracle() -> None:
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = ring.RingElement(rng.integers(0, fields.Q, ring.N))
        b = ring.RingElement(rng.integers(0, fields.Q, ring.N))
        fast = ring.ntt_inverse(ring.poly_mul(ring.ntt_forward(a), ring.ntt_forward(b)))
        _require(fast == ring.poly_mul(a, b), "NTT product disagrees with schoolbook")


def _check_kyber() -> None:
    for p in kyber.PARAMS.values():
        pk, sk = kyber.kyber_keygen(p, bytes(32))
        m = bytes(range(32))
        ct = kyber.kyber_encrypt(pk, m, bytes([1]) * 32)
        _require(len(pk.to_bytes()) == p.pk_bytes == costmodel.PUBLISHED_KYBER_SIZES[p.level][0], f"{p.name} key size")
        _require(len(ct.to_bytes()) == p.ct_bytes == costmodel.PUBLISHED_KYBER_SIZES[p.level][1], f"{p.name} ct size")
        _require(kyber.kyber_decrypt(sk, ct) == m, f"{p.name} round trip")


def _check_gf2_oracle() -> None:
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = rng.integers(0, 2, (8, 8))
        b = rng.integers(0, 2, (8, 8))
        got = gf2linalg.bm_mul(gf2linalg.BitMatrix.from_bits(a), gf2linalg.BitMatrix.from_bits(b)).to_bits()
        _require(np.array_equal(got, (a @ b) % 2), "packed GF(2) product disagrees with naive product")


def _check_goppa_toy() -> None:
    p = mceliece.TOY16
    goppa, h, g = mceliece.goppa_generate(p, mceliece.rng_from_seed(b"selftest"))
    _require(gf2linalg.bm_mul(g, h.transpose()).is_zero(), "G H^T != 0")
    msgs = [gf2linalg.BitVector.from_bits([(i >> b) & 1 for b in range(p.k)]) for i in (0, 1, 0x5A, 0xFF)]
    for msg in msgs:
        c = gf2linalg.bm_vec_mul(msg, g)
        for w in range(p.t + 1):
            for pos in itertools.combinations(range(p.n), w):
                e = np.zeros(p.n, dtype=np.uint8)
                e[list(pos)] = 1
                y = c ^ gf2linalg.BitVector.from_bits(e)
                got, _ = mceliece.patterson_decode(goppa, y)
                _require(got == c, "toy Goppa decoder missed a correctable error")


def _check_model() -> None:
    _require(costmodel.kyber_model_flops(kyber.KYBER512) == (2048, 4096, 1024), "Kyber FLOP model")
    kg, enc, dec = costmodel.mceliece_model_flops(mceliece.MCELIECE348864)
    _require(abs(kg / 8.5e10 - 1) < 0.02 and abs(enc / 2.4e7 - 1) < 0.02, "McEliece FLOP model")
    for p in mceliece.PUBLISHED_PARAMS[:2]:
        _require(p.pk_bytes_systematic == costmodel.PUBLISHED_MCELIECE_SIZES[p.name][0], f"{p.name} key size formula")


def _check_mceliece_full() -> None:
    p = mceliece.MCELIECE348864
    rng = mceliece.rng_from_seed(b"selftest-full")
    pk, sk = mceliece.mceliece_keygen(p, mceliece.SYSTEMATIC, rng)
    _require(len(pk.to_bytes()) == costmodel.PUBLISHED_MCELIECE_SIZES[p.name][0], "348864 key size")
    msg = gf2linalg.BitVector.random(p.k, rng)
    _require(mceliece.mceliece_decrypt(sk, mceliece.mceliece_encrypt(pk, msg, rng)) == msg, "348864 round trip")


CHECKS: list[tuple[str, Callable[[], None], bool]] = [
    ("constants", _check_constants, True),
    ("ntt-oracle", _check_ntt_oracle, True),
    ("kyber-sizes-roundtrip", _check_kyber, True),
    ("gf2-oracle", _check_gf2_oracle, True),
    ("goppa-toy-exhaustive", _check_goppa_toy, True),
    ("cost-model", _check_model, True),
    ("mceliece-348864", _check_mceliece_full, False),
]


def run(quick: bool = False, log: Callable[[str], None] = print) -> list[str]:
    """Run the checks; returns the names of the failing ones."""
    failed = []
    for name, fn, in_quick in CHECKS:
        if quick and not in_quick:
            continue
        start = time.perf_counter()
        try:
            fn()
            status = "ok"
        except Exception as exc:  # noqa: BLE001 - report every failing check
            failed.append(name)
            status = f"FAIL ({exc})"
        log(f"{name:24s} {status} [{time.perf_counter() - start:.2f}s]")
    return failed
