"""Module-LWE public-key encryption (the CPA-secure PKE underlying Kyber / ML-KEM).

Three equations carry the whole scheme::

    keygen:   t = A s + e
    encrypt:  u = A^T r + e1,   v = t^T r + e2 + encode(m)
    decrypt:  m = decode(v - s^T u)

Products are taken in the NTT domain. Byte layouts match FIPS 203 K-PKE, so
a public key is ``384*k + 32`` bytes and a ciphertext ``32*(k*d_u + d_v)``.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from . import ring
from .counters import OpCounters
from .fields import Q
from .ring import NTT, PolyMatrix, PolyVec, RingElement


@dataclass(frozen=True)
class KyberParams:
    name: str
    k: int
    eta1: int
    eta2: int
    d_u: int
    d_v: int
    n: int = ring.N
    q: int = Q

    @property
    def level(self) -> str:
        return self.name.removeprefix("Kyber")

    @property
    def pk_bytes(self) -> int:
        return 384 * self.k + 32

    @property
    def sk_bytes(self) -> int:
        return 384 * self.k

    @property
    def ct_bytes(self) -> int:
        return 32 * (self.k * self.d_u + self.d_v)


KYBER512 = KyberParams("Kyber512", k=2, eta1=3, eta2=2, d_u=10, d_v=4)
KYBER768 = KyberParams("Kyber768", k=3, eta1=2, eta2=2, d_u=10, d_v=4)
KYBER1024 = KyberParams("Kyber1024", k=4, eta1=2, eta2=2, d_u=11, d_v=5)

PARAMS = {p.level: p for p in (KYBER512, KYBER768, KYBER1024)}


def get_params(level: str | int) -> KyberParams:
    key = str(level).removeprefix("Kyber").removeprefix("kyber")
    try:
        return PARAMS[key]
    except KeyError:
        raise ValueError(f"unknown Kyber level {level!r}; choose from {sorted(PARAMS)}") from None


@dataclass(eq=False)
class KyberPublicKey:
    params: KyberParams
    t_hat: PolyVec
    rho: bytes

    def to_bytes(self) -> bytes:
        return ring.pack_bits(self.t_hat.data, 12) + self.rho

    @classmethod
    def from_bytes(cls, params: KyberParams, data: bytes) -> KyberPublicKey:
        if len(data) != params.pk_bytes:
            raise ValueError(f"{params.name} public key is {params.pk_bytes} bytes, got {len(data)}")
        t = ring.unpack_bits(data[: 384 * params.k], 12, params.k * ring.N).reshape(params.k, ring.N)
        if np.any(t >= Q):
            raise ValueError("public key coefficient out of range")
        return cls(params, PolyVec(t, NTT), bytes(data[384 * params.k :]))

    def __eq__(self, other):
        return isinstance(other, KyberPublicKey) and self.to_bytes() == other.to_bytes()


@dataclass(eq=False)
class KyberSecretKey:
    params: KyberParams
    s_hat: PolyVec

    def to_bytes(self) -> bytes:
        return ring.pack_bits(self.s_hat.data, 12)

    @classmethod
    def from_bytes(cls, params: KyberParams, data: bytes) -> KyberSecretKey:
        if len(data) != params.sk_bytes:
            raise ValueError(f"{params.name} secret key is {params.sk_bytes} bytes, got {len(data)}")
        s = ring.unpack_bits(data, 12, params.k * ring.N).reshape(params.k, ring.N)
        if np.any(s >= Q):
            raise ValueError("secret key coefficient out of range")
        return cls(params, PolyVec(s, NTT))

    def __eq__(self, other):
        return isinstance(other, KyberSecretKey) and self.to_bytes() == other.to_bytes()


@dataclass(eq=False)
class KyberCiphertext:
    """Compressed (u, v) as packed bytes."""

    params: KyberParams
    u: bytes
    v: bytes

    def to_bytes(self) -> bytes:
        return self.u + self.v

    @classmethod
    def from_bytes(cls, params: KyberParams, data: bytes) -> KyberCiphertext:
        if len(data) != params.ct_bytes:
            raise ValueError(f"{params.name} ciphertext is {params.ct_bytes} bytes, got {len(data)}")
        split = 32 * params.k * params.d_u
        return cls(params, bytes(data[:split]), bytes(data[split:]))

    def __eq__(self, other):
        return isinstance(other, KyberCiphertext) and self.to_bytes() == other.to_bytes()


def _noise_vec(seed: bytes, nonce: int, k: int, eta: int, ops: OpCounters | None) -> PolyVec:
    return PolyVec.of([ring.cbd_sample(ring.prf(seed, nonce + i, eta), eta, ops) for i in range(k)])


def keygen_from(
    params: KyberParams, rho: bytes, s: PolyVec, e: PolyVec, ops: OpCounters | None = None
) -> tuple[KyberPublicKey, KyberSecretKey]:
    """t = A s + e for explicit coefficient-domain s and e."""
    a_hat = ring.expand_matrix(rho, params.k)
    s_hat = ring.ntt_forward(s, ops)
    e_hat = ring.ntt_forward(e, ops)
    t_hat = ring.matvec(a_hat, s_hat, ops) + e_hat
    if ops is not None:
        ops.zq_adds += params.k * ring.N
    return KyberPublicKey(params, t_hat, rho), KyberSecretKey(params, s_hat)


def kyber_keygen(
    params: KyberParams, seed: bytes | None = None, ops: OpCounters | None = None
) -> tuple[KyberPublicKey, KyberSecretKey]:
    """Key pair from a 32-byte seed (random when omitted)."""
    d = os.urandom(32) if seed is None else seed
    if len(d) != 32:
        raise ValueError("keygen seed must be 32 bytes")
    g = hashlib.sha3_512(d + bytes([params.k])).digest()
    rho, sigma = g[:32], g[32:]
    s = _noise_vec(sigma, 0, params.k, params.eta1, ops)
    e = _noise_vec(sigma, params.k, params.k, params.eta1, ops)
    return keygen_from(params, rho, s, e, ops)


def encrypt_raw(
    pk: KyberPublicKey,
    m: bytes,
    r: PolyVec,
    e1: PolyVec,
    e2: RingElement,
    ops: OpCounters | None = None,
    a_t: PolyMatrix | None = None,
) -> tuple[PolyVec, RingElement]:
    """Uncompressed (u, v) for explicit randomness and noise."""
    if a_t is None:
        a_t = ring.expand_matrix(pk.rho, pk.params.k, transpose=True)
    r_hat = ring.ntt_forward(r, ops)
    u = ring.ntt_inverse(ring.matvec(a_t, r_hat, ops), ops) + e1
    v = ring.ntt_inverse(ring.inner(pk.t_hat, r_hat, ops), ops) + e2 + ring.encode_msg(m)
    if ops is not None:
        ops.zq_adds += (pk.params.k + 2) * ring.N
    return u, v


def kyber_encrypt(
    pk: KyberPublicKey, m: bytes, coins: bytes | None = None, ops: OpCounters | None = None
) -> KyberCiphertext:
    p = pk.params
    if len(m) != ring.MSG_BYTES:
        raise ValueError("messages are exactly 32 bytes")
    coins = os.urandom(32) if coins is None else coins
    if len(coins) != 32:
        raise ValueError("encryption coins must be 32 bytes")
    r = _noise_vec(coins, 0, p.k, p.eta1, ops)
    e1 = _noise_vec(coins, p.k, p.k, p.eta2, ops)
    e2 = ring.cbd_sample(ring.prf(coins, 2 * p.k, p.eta2), p.eta2, ops)
    u, v = encrypt_raw(pk, m, r, e1, e2, ops)
    return KyberCiphertext(p, ring.compress(u, p.d_u, ops), ring.compress(v, p.d_v, ops))


def decrypt_raw(sk: KyberSecretKey, u: PolyVec, v: RingElement, ops: OpCounters | None = None) -> bytes:
    w = v - ring.ntt_inverse(ring.inner(sk.s_hat, ring.ntt_forward(u, ops), ops), ops)
    if ops is not None:
        ops.zq_adds += ring.N
    return ring.decode_msg(w)


def kyber_decrypt(sk: KyberSecretKey, ct: KyberCiphertext, ops: OpCounters | None = None) -> bytes:
    p = sk.params
    if ct.params != p:
        raise ValueError(f"ciphertext is for {ct.params.name}, key is {p.name}")
    u = ring.decompress(ct.u, p.d_u, k=p.k, ops=ops)
    v = ring.decompress(ct.v, p.d_v, ops=ops)
    return decrypt_raw(sk, u, v, ops)
