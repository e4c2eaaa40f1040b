"""The AMOUN multi-recipient scheme: key generation, group setup,
batched encryption and per-recipient decryption.

One ciphertext carries a different message for every member of a group.
Recipient ``i`` recovers only its own slot with ``((C mod k) * y) mod v``.

.. warning::
   Research scheme. No padding, no integrity, no side-channel hardening.
   Decrypting with the wrong key silently yields garbage.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import gcd, prod
from typing import Sequence, Union

from .errors import (
    BudgetEmpty,
    GroupTooSmall,
    IndexOutOfRange,
    InvalidParameters,
    LengthMismatch,
    MalformedEnvelope,
    MessageTooLarge,
    ModuliNotCoprime,
    RetryBudgetExhausted,
)
from .numeric import RandomSource, mod_inverse, mod_pow, random_prime

MIN_BUDGET_BITS = 8

Message = Union[bytes, int]


@dataclass(frozen=True)
class KeyGenParams:
    """Bit sizes for one key and for the sender's random integers.

    ``alpha_bits`` sizes the primes k, p, q; ``v_bits`` sizes v. The sender
    draws f, t and the per-encryption coin r below ``2**f_bits``,
    ``2**t_bits`` and ``2**r_bits``. These sizes must leave room for a
    message: see :meth:`budget_bits`.
    """

    alpha_bits: int = 1024
    v_bits: int = 512
    t_bits: int = 128
    r_bits: int = 128
    f_bits: int = 128

    def __post_init__(self):
        for name in ("alpha_bits", "v_bits", "t_bits", "r_bits", "f_bits"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidParameters(f"{name} must be an integer")
        if self.v_bits < 8:
            raise InvalidParameters("v_bits must be >= 8")
        if self.alpha_bits <= self.v_bits:
            raise InvalidParameters("alpha_bits must exceed v_bits")
        if min(self.t_bits, self.r_bits, self.f_bits) < 1:
            raise InvalidParameters("t_bits, r_bits and f_bits must be >= 1")
        if self.budget_bits < MIN_BUDGET_BITS:
            raise BudgetEmpty(
                f"alpha_bits={self.alpha_bits} leaves {self.raw_budget_bits} bits "
                f"after v_bits + t_bits + r_bits + 2; need >= {MIN_BUDGET_BITS}"
            )

    @classmethod
    def scaled(cls, alpha_bits: int) -> "KeyGenParams":
        """Defaults rescaled to another prime size (v = alpha/2, f = t = r = alpha/8)."""
        eighth = alpha_bits // 8
        return cls(alpha_bits, alpha_bits // 2, eighth, eighth, eighth)

    @property
    def raw_budget_bits(self) -> int:
        return self.alpha_bits - (self.v_bits + self.t_bits + self.r_bits) - 2

    @property
    def budget_bits(self) -> int:
        # m * (y^-1 + v*t*r) < 2**(B + v + t + r + 1) <= 2**(alpha - 1) <= k
        return min(self.raw_budget_bits, self.v_bits - 1)


@dataclass(frozen=True)
class PublicKey:
    n: int
    e: int
    d: int


@dataclass(frozen=True)
class PrivateKey:
    k: int
    v: int
    y: int


def derive_keys(k: int, p: int, q: int, v: int, y: int) -> tuple[PublicKey, PrivateKey]:
    """Build a key pair from already-chosen primes and ``y``.

    Raises InvalidParameters when the primes are not distinct, ``y`` is
    outside ``[1, v)``, or one of the public gcd conditions fails.
    """
    if len({k, p, q, v}) != 4:
        raise InvalidParameters("k, p, q, v must be distinct")
    if not 1 <= y < v:
        raise InvalidParameters("y must lie in [1, v)")
    if v >= k:
        raise InvalidParameters("v must be smaller than k")
    y_inv = mod_inverse(y, v)
    n = k * p
    e = (k * q + y_inv) % n
    d = mod_pow(v, k, n)
    if gcd(n, e) != 1 or gcd(n, d) != 1 or gcd(e, d) != 1:
        raise InvalidParameters("public key violates gcd(N,e)=gcd(N,d)=gcd(e,d)=1")
    return PublicKey(n, e, d), PrivateKey(k, v, y)


def key_generate(
    params: KeyGenParams, rng: RandomSource, *, max_retries: int = 32
) -> tuple[PublicKey, PrivateKey]:
    """Generate a recipient key pair.

    q is redrawn first when the gcd conditions fail (they mostly involve e);
    after that all primes are redrawn, up to ``max_retries`` times.
    """
    for _ in range(max_retries):
        k = random_prime(params.alpha_bits, rng)
        p = random_prime(params.alpha_bits, rng)
        if p == k:
            continue
        v = random_prime(params.v_bits, rng)
        y = rng.random_range(1, v)
        for _ in range(8):
            q = random_prime(params.alpha_bits, rng)
            if q in (k, p):
                continue
            try:
                return derive_keys(k, p, q, v, y)
            except InvalidParameters:
                continue
    raise RetryBudgetExhausted(f"no valid key after {max_retries} attempts")


def message_budget(public_key: PublicKey, params: KeyGenParams) -> int:
    """Largest message bit length that decrypts correctly under ``params``.

    Worst case over every admissible secret: the sender knows neither
    y^-1 nor v, only their sizes.
    """
    if params.budget_bits < MIN_BUDGET_BITS:
        raise BudgetEmpty(f"budget of {params.budget_bits} bits is below one byte")
    if public_key.n.bit_length() not in (2 * params.alpha_bits - 1, 2 * params.alpha_bits):
        raise InvalidParameters(
            f"a {public_key.n.bit_length()}-bit modulus does not match alpha_bits={params.alpha_bits}"
        )
    return params.budget_bits


def crt_weights(moduli: Sequence[int]) -> tuple[int, list[int]]:
    """Return ``(X, AX)`` with ``X = prod(moduli)`` and ``AX[i] = A_i * X / N_i``.

    ``AX[i]`` is 1 modulo ``moduli[i]`` and 0 modulo every other modulus.
    """
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if gcd(moduli[i], moduli[j]) != 1:
                raise ModuliNotCoprime(i, j)
    x = prod(moduli)
    weights = []
    for n in moduli:
        cofactor = x // n
        weights.append(mod_inverse(cofactor % n, n) * cofactor)
    return x, weights


@dataclass(frozen=True)
class GroupEntry:
    public_key: PublicKey
    n_prime: int
    ax: int
    budget_bits: int


@dataclass(frozen=True)
class GroupContext:
    """Sender-side state for one receiving group.

    Holds the blinded moduli ``N' = N*f + d*t``, which must stay private to
    the sender. f and t themselves are discarded once ``N'`` is computed.
    """

    entries: tuple[GroupEntry, ...]
    x_modulus: int
    r_bits: int
    group_id: str = ""

    def __len__(self):
        return len(self.entries)

    @property
    def public_keys(self) -> list[PublicKey]:
        return [entry.public_key for entry in self.entries]

    @classmethod
    def assemble(
        cls,
        public_keys: Sequence[PublicKey],
        f: Sequence[int],
        t: Sequence[int],
        budget_bits: Sequence[int],
        r_bits: int = 1,
        group_id: str = "",
    ) -> "GroupContext":
        """Build a context from explicitly chosen f and t.

        Accepts any values, including zero. Prefer :func:`group_init`,
        which draws them properly.
        """
        if not len(public_keys) == len(f) == len(t) == len(budget_bits):
            raise LengthMismatch("public_keys, f, t and budget_bits differ in length")
        if len(public_keys) < 2:
            raise GroupTooSmall("a group needs at least two recipients")
        x, weights = crt_weights([pk.n for pk in public_keys])
        entries = tuple(
            GroupEntry(pk, pk.n * fi + pk.d * ti, ax, b)
            for pk, fi, ti, ax, b in zip(public_keys, f, t, weights, budget_bits)
        )
        return cls(entries, x, r_bits, group_id)


def _blinded_modulus(pk: PublicKey, params: KeyGenParams, rng: RandomSource) -> int:
    f = rng.random_range(1, 1 << params.f_bits)
    t = rng.random_range(1, 1 << params.t_bits)
    return pk.n * f + pk.d * t


def _new_group_id(rng: RandomSource) -> str:
    return rng.random_bytes(8).hex()


def group_init(
    public_keys: Sequence[PublicKey], params: KeyGenParams, rng: RandomSource
) -> GroupContext:
    if len(public_keys) < 2:
        raise GroupTooSmall("a group needs at least two recipients")
    x, weights = crt_weights([pk.n for pk in public_keys])
    entries = tuple(
        GroupEntry(pk, _blinded_modulus(pk, params, rng), ax, message_budget(pk, params))
        for pk, ax in zip(public_keys, weights)
    )
    return GroupContext(entries, x, params.r_bits, _new_group_id(rng))


def _reweight(ctx: GroupContext, entries: Sequence[GroupEntry]) -> GroupContext:
    x, weights = crt_weights([entry.public_key.n for entry in entries])
    new_entries = tuple(replace(entry, ax=ax) for entry, ax in zip(entries, weights))
    return GroupContext(new_entries, x, ctx.r_bits, ctx.group_id)


def group_add_recipient(
    ctx: GroupContext, pk: PublicKey, params: KeyGenParams, rng: RandomSource
) -> GroupContext:
    """Return a new context with ``pk`` appended.

    Every CRT weight depends on the full product X, so all of them are
    recomputed. Existing blinded moduli are kept. No recipient is contacted.
    """
    if params.r_bits != ctx.r_bits:
        raise InvalidParameters("params.r_bits differs from the group's coin width")
    if gcd(pk.n, ctx.x_modulus) != 1:
        clash = next(i for i, e in enumerate(ctx.entries) if gcd(e.public_key.n, pk.n) != 1)
        raise ModuliNotCoprime(clash, len(ctx.entries))
    entry = GroupEntry(pk, _blinded_modulus(pk, params, rng), 0, message_budget(pk, params))
    return _reweight(ctx, ctx.entries + (entry,))


def group_remove_recipient(ctx: GroupContext, index: int) -> GroupContext:
    if not 0 <= index < len(ctx.entries):
        raise IndexOutOfRange(f"no recipient at position {index}")
    if len(ctx.entries) < 3:
        raise GroupTooSmall("removing a recipient would leave fewer than two")
    remaining = ctx.entries[:index] + ctx.entries[index + 1 :]
    return _reweight(ctx, remaining)


@dataclass(frozen=True)
class CiphertextEnvelope:
    c: int
    group_id: str = ""
    recipient_count: int = field(default=0)


def encode_message(data: bytes) -> int:
    return int.from_bytes(data, "big")


def decode_message(value: int, length: int) -> bytes:
    if value < 0:
        raise ValueError("cannot decode a negative integer")
    try:
        return value.to_bytes(length, "big")
    except OverflowError:
        raise ValueError(f"{value.bit_length()}-bit value does not fit in {length} bytes") from None


def _as_int(message: Message) -> int:
    if isinstance(message, (bytes, bytearray, memoryview)):
        return encode_message(bytes(message))
    if isinstance(message, int) and not isinstance(message, bool):
        return message
    raise TypeError(f"messages must be bytes or int, not {type(message).__name__}")


def encrypt(
    ctx: GroupContext,
    messages: Sequence[Message],
    rng: RandomSource | None = None,
    *,
    coins: Sequence[int] | None = None,
    workers: int | None = None,
) -> CiphertextEnvelope:
    """Encrypt one message per recipient into a single ciphertext.

    ``messages[i]`` goes to ``ctx.entries[i]``. Each message is checked
    against its recipient's budget before any arithmetic. A fresh coin is
    drawn per recipient from ``rng``; passing ``coins`` instead fixes them
    (zero allowed) and exists for reproducible tests only.

    With ``workers`` the per-recipient terms are computed on a thread pool
    and summed in recipient order.
    """
    if len(messages) != len(ctx.entries):
        raise LengthMismatch(f"{len(messages)} messages for {len(ctx.entries)} recipients")
    values = [_as_int(m) for m in messages]
    for i, (m, entry) in enumerate(zip(values, ctx.entries)):
        if m < 0:
            raise MessageTooLarge(i, "negative")
        if m.bit_length() > entry.budget_bits:
            raise MessageTooLarge(i, f"{m.bit_length()} bits > {entry.budget_bits}")
    if coins is None:
        if rng is None:
            raise ValueError("either rng or coins is required")
        # budgets assume every coin is below 2**r_bits
        coins = [rng.random_range(1, 1 << ctx.r_bits) for _ in ctx.entries]
    elif len(coins) != len(ctx.entries):
        raise LengthMismatch("one coin per recipient is required")

    x = ctx.x_modulus

    def term(i):
        entry = ctx.entries[i]
        e_blind = entry.public_key.e + entry.n_prime * coins[i]
        return values[i] * (e_blind * entry.ax) % x

    indices = range(len(ctx.entries))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            terms = list(pool.map(term, indices))
    else:
        terms = [term(i) for i in indices]
    return CiphertextEnvelope(sum(terms) % x, ctx.group_id, len(ctx.entries))


def decrypt_int(sk: PrivateKey, c: int) -> int:
    return (c % sk.k) * sk.y % sk.v


def decrypt(sk: PrivateKey, env: CiphertextEnvelope, length: int | None = None) -> bytes:
    """Recover this recipient's slot as bytes.

    ``length`` restores leading zero bytes; without it the shortest
    encoding (at least one byte) is returned. A key that was never part of
    the group produces arbitrary bytes, not an error.
    """
    if not isinstance(env.c, int) or env.c < 0:
        raise MalformedEnvelope("ciphertext must be a non-negative integer")
    m = decrypt_int(sk, env.c)
    if length is None:
        length = max(1, (m.bit_length() + 7) // 8)
    try:
        return decode_message(m, length)
    except ValueError as exc:
        raise MalformedEnvelope(str(exc)) from None


def generate_group_keys(
    count: int, params: KeyGenParams, rng: RandomSource, *, max_retries: int = 32
) -> list[tuple[PublicKey, PrivateKey]]:
    """Generate ``count`` key pairs whose moduli are pairwise coprime.

    A key sharing a factor with an earlier one is discarded and redrawn.
    Prime collisions are negligible at real sizes but common at small ones.
    """
    keys: list[tuple[PublicKey, PrivateKey]] = []
    retries = 0
    while len(keys) < count:
        pk, sk = key_generate(params, rng)
        if all(gcd(pk.n, other.n) == 1 for other, _ in keys):
            keys.append((pk, sk))
            continue
        retries += 1
        if retries > max_retries:
            raise RetryBudgetExhausted("could not draw pairwise-coprime moduli")
    return keys
