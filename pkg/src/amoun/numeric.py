"""Arbitrary-precision number theory used by every scheme in the package.

Everything here works on plain Python ``int``. The only stateful object is
:class:`RandomSource`; give each thread its own instance.
"""
from __future__ import annotations

import random
import secrets

from .errors import NotInvertible, RetryBudgetExhausted

KEYGEN_ROUNDS = 64

_SMALL_PRIMES = [p for p in range(3, 1000) if all(p % d for d in range(2, int(p**0.5) + 1))]


class RandomSource:
    """Uniform integer source, reproducible when seeded.

    With ``seed=None`` draws come from the operating system CSPRNG. With a
    seed, a Mersenne Twister is used so that tests and benchmarks can replay
    the exact same key material. Bounded draws go through
    ``randrange``, which rejects out-of-range samples instead of reducing
    raw bits modulo the bound.
    """

    def __init__(self, seed: int | None = None):
        self.seed = seed
        self._gen = secrets.SystemRandom() if seed is None else random.Random(seed)

    @property
    def deterministic(self) -> bool:
        return self.seed is not None

    def random_below(self, bound: int) -> int:
        if bound < 1:
            raise ValueError("bound must be positive")
        return self._gen.randrange(bound)

    def random_range(self, low: int, high: int) -> int:
        """Integer in ``[low, high)``."""
        return low + self.random_below(high - low)

    def random_bits(self, bits: int) -> int:
        return self._gen.getrandbits(bits) if bits > 0 else 0

    def random_bytes(self, n: int) -> bytes:
        return self.random_bits(8 * n).to_bytes(n, "big")

    def spawn(self) -> "RandomSource":
        """Independent child source; deterministic if this one is."""
        if self.seed is None:
            return RandomSource()
        return RandomSource(self.random_bits(64))


def is_probable_prime(n: int, rounds: int = KEYGEN_ROUNDS, rng: RandomSource | None = None) -> bool:
    """Miller-Rabin test preceded by trial division by primes below 1000.

    Primes always pass. A composite survives with probability at most
    ``4 ** -rounds``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if n < 2:
        return False
    if n == 2:
        return True
    if n % 2 == 0:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    rng = rng or RandomSource()
    s, d = 0, n - 1
    while d % 2 == 0:
        s += 1
        d //= 2
    for _ in range(rounds):
        a = rng.random_range(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: RandomSource, *, max_attempts: int | None = None) -> int:
    """Draw an odd probable prime with exactly ``bits`` significant bits."""
    if bits < 8:
        raise ValueError("bits must be >= 8")
    # Prime density near 2**bits is about 1/(bits ln 2); allow a wide margin.
    if max_attempts is None:
        max_attempts = 100 * bits
    top = 1 << (bits - 1)
    for _ in range(max_attempts):
        candidate = rng.random_bits(bits) | top | 1
        if is_probable_prime(candidate, KEYGEN_ROUNDS, rng):
            return candidate
    raise RetryBudgetExhausted(f"no {bits}-bit prime found in {max_attempts} attempts")


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``a*x + b*y == g``."""
    if a == 0 and b == 0:
        raise ValueError("ext_gcd(0, 0) is undefined")
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def mod_inverse(a: int, m: int) -> int:
    if m < 2:
        raise ValueError("modulus must be >= 2")
    g, x, _ = ext_gcd(a % m, m)
    if g != 1:
        raise NotInvertible(a, m)
    return x % m


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    """``base ** exponent % modulus``.

    Delegates to the interpreter's built-in, which is a windowed
    square-and-multiply in C: cost grows with the exponent's bit length
    times the cost of one modular squaring.
    """
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if exponent < 0:
        raise ValueError("negative exponents are not supported")
    return pow(base, exponent, modulus)
