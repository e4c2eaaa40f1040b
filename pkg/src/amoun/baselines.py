"""Textbook RSA and CRT-combined Multi-RSA, used as benchmark comparators.

Unpadded and deterministic. Not for protecting real data.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .errors import (
    GroupTooSmall,
    InvalidParameters,
    LengthMismatch,
    MalformedEnvelope,
    MessageTooLarge,
    RetryBudgetExhausted,
)
from .numeric import RandomSource, mod_inverse, mod_pow, random_prime
from .scheme import crt_weights


@dataclass(frozen=True)
class RsaPublicKey:
    n: int
    e: int


@dataclass(frozen=True)
class RsaKeyPair:
    n: int
    e: int
    d: int
    p: int
    q: int

    @property
    def public(self) -> RsaPublicKey:
        return RsaPublicKey(self.n, self.e)

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)


def rsa_keypair_from(p: int, q: int, e: int) -> RsaKeyPair:
    if p == q:
        raise InvalidParameters("P and Q must differ")
    phi = (p - 1) * (q - 1)
    if gcd(e, phi) != 1:
        raise InvalidParameters("e is not coprime with phi")
    return RsaKeyPair(p * q, e, mod_inverse(e, phi), p, q)


def rsa_keygen(bits_per_prime: int, rng: RandomSource, *, max_retries: int = 32) -> RsaKeyPair:
    """Key pair with a random public exponent in ``[3, P)`` coprime to phi."""
    if bits_per_prime < 8:
        raise InvalidParameters("bits_per_prime must be >= 8")
    for _ in range(max_retries):
        p = random_prime(bits_per_prime, rng)
        q = random_prime(bits_per_prime, rng)
        if p == q:
            continue
        phi = (p - 1) * (q - 1)
        for _ in range(64):
            e = rng.random_range(3, p)
            if gcd(e, phi) == 1:
                return rsa_keypair_from(p, q, e)
    raise RetryBudgetExhausted(f"no RSA key after {max_retries} attempts")


def rsa_encrypt(pk: RsaPublicKey | RsaKeyPair, m: int) -> int:
    if not 0 <= m < pk.n:
        raise MessageTooLarge(0, "RSA message must satisfy 0 <= m < N")
    return mod_pow(m, pk.e, pk.n)


def rsa_decrypt(kp: RsaKeyPair, c: int) -> int:
    return mod_pow(c, kp.d, kp.n)


def rsa_concat_encrypt(pks: Sequence[RsaPublicKey | RsaKeyPair], messages: Sequence[int]) -> bytes:
    """Encrypt each message separately and concatenate the results.

    Each sub-ciphertext is framed as a 4-byte big-endian length followed
    by the ciphertext bytes.
    """
    if len(pks) != len(messages):
        raise LengthMismatch(f"{len(messages)} messages for {len(pks)} keys")
    out = bytearray()
    for i, (pk, m) in enumerate(zip(pks, messages)):
        try:
            c = rsa_encrypt(pk, m)
        except MessageTooLarge:
            raise MessageTooLarge(i, "RSA message must satisfy 0 <= m < N") from None
        raw = c.to_bytes((pk.n.bit_length() + 7) // 8, "big")
        out += struct.pack(">I", len(raw)) + raw
    return bytes(out)


def rsa_concat_split(buf: bytes) -> list[int]:
    """Inverse of the framing in :func:`rsa_concat_encrypt`."""
    out = []
    pos = 0
    while pos < len(buf):
        if pos + 4 > len(buf):
            raise MalformedEnvelope("truncated length prefix")
        (size,) = struct.unpack_from(">I", buf, pos)
        pos += 4
        if pos + size > len(buf):
            raise MalformedEnvelope("truncated sub-ciphertext")
        out.append(int.from_bytes(buf[pos : pos + size], "big"))
        pos += size
    return out


def rsa_concat_decrypt(kp: RsaKeyPair, buf: bytes, index: int) -> int:
    return rsa_decrypt(kp, rsa_concat_split(buf)[index])


@dataclass(frozen=True)
class MultiRsaContext:
    public_keys: tuple[RsaPublicKey, ...]
    ax: tuple[int, ...]
    x_modulus: int


def multirsa_init(pks: Sequence[RsaPublicKey | RsaKeyPair]) -> MultiRsaContext:
    if len(pks) < 2:
        raise GroupTooSmall("Multi-RSA needs at least two recipients")
    x, weights = crt_weights([pk.n for pk in pks])
    return MultiRsaContext(tuple(RsaPublicKey(pk.n, pk.e) for pk in pks), tuple(weights), x)


def multirsa_encrypt(ctx: MultiRsaContext, messages: Sequence[int]) -> int:
    if len(messages) != len(ctx.public_keys):
        raise LengthMismatch(f"{len(messages)} messages for {len(ctx.public_keys)} recipients")
    total = 0
    for i, (pk, ax, m) in enumerate(zip(ctx.public_keys, ctx.ax, messages)):
        if not 0 <= m < pk.n:
            raise MessageTooLarge(i, "Multi-RSA message must satisfy 0 <= m < N")
        total += mod_pow(m, pk.e, pk.n) * ax
    return total % ctx.x_modulus


def multirsa_decrypt(kp: RsaKeyPair, c: int) -> int:
    return mod_pow(c % kp.n, kp.d, kp.n)


def generate_rsa_keys(count: int, bits_per_prime: int, rng: RandomSource) -> list[RsaKeyPair]:
    """``count`` RSA key pairs with pairwise-coprime moduli."""
    keys: list[RsaKeyPair] = []
    for _ in range(count + 32):
        if len(keys) == count:
            break
        kp = rsa_keygen(bits_per_prime, rng)
        if all(gcd(kp.n, other.n) == 1 for other in keys):
            keys.append(kp)
    if len(keys) < count:
        raise RetryBudgetExhausted("could not draw pairwise-coprime RSA moduli")
    return keys
