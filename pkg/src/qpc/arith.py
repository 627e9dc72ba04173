"""Sieve, factorization, and the multiplicative functions behind the counts.

Everything downstream (counting, Euler factors, constants) consumes the
two arithmetic primitives defined here:

    r4*(d) = sum of divisors l of d with l not divisible by 4,

so that 8*r4*(d) counts representations of d as a sum of four squares, and
smallest-prime-factor (SPF) factorization, which keeps the counting hot
loop at O(log n) per integer.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CacheFormatError, ResourceError

DEFAULT_SIEVE_LIMIT = 10**7
# SPF entries are 4 bytes each; the budget caps sieve allocations.
DEFAULT_MEMORY_BUDGET = 1 << 29

_CACHE_MAGIC = b"SQ4C"
_CACHE_VERSION = 1


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer with its full prime factorization.

    factors is a tuple of (prime, exponent) pairs with primes strictly
    increasing and exponents >= 1; value == product of p**e; value == 1
    iff factors is empty.
    """

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"value must be positive, got {self.value}")
        prod = 1
        last_p = 1
        for p, e in self.factors:
            if p <= last_p:
                raise ValueError("primes must be strictly increasing")
            if e < 1:
                raise ValueError("exponents must be >= 1")
            last_p = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")


@dataclass(frozen=True)
class RationalBound:
    """An exact non-negative rational bound num/den, kept in reduced form.

    Comparisons against integers are exact integer cross-multiplications,
    so height cutoffs like m <= B/k never touch floating point.
    """

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if self.numerator < 0:
            raise ValueError("numerator must be non-negative")
        g = math.gcd(self.numerator, self.denominator)
        if g > 1:
            object.__setattr__(self, "numerator", self.numerator // g)
            object.__setattr__(self, "denominator", self.denominator // g)

    def contains(self, m: int) -> bool:
        """Exact test m <= num/den."""
        return m * self.denominator <= self.numerator

    def floor(self) -> int:
        return self.numerator // self.denominator

    def squared(self) -> "RationalBound":
        return RationalBound(self.numerator**2, self.denominator**2)

    def divided_by(self, k: int) -> "RationalBound":
        if k <= 0:
            raise ValueError("divisor must be positive")
        return RationalBound(self.numerator, self.denominator * k)

    def __float__(self) -> float:
        return self.numerator / self.denominator


class SpfSieve:
    """Smallest-prime-factor table covering 2..limit.

    spf is a uint32 numpy array of length limit+1 with spf[i] the smallest
    prime factor of i for 2 <= i <= limit (spf[p] == p exactly for primes).
    Immutable after construction; safe to share across worker processes.
    """

    __slots__ = ("limit", "spf")

    def __init__(self, limit: int, spf: np.ndarray):
        self.limit = limit
        self.spf = spf

    def factor_list(self, n: int) -> list[tuple[int, int]]:
        """Fast-path factorization as a plain list of (prime, exponent)."""
        if not 1 <= n <= self.limit:
            raise ResourceError(f"{n} outside sieve range [1, {self.limit}]")
        out = []
        spf = self.spf
        m = n
        while m > 1:
            p = int(spf[m])
            a = 0
            while m % p == 0:
                a += 1
                m //= p
            out.append((p, a))
        return out

    def is_prime(self, n: int) -> bool:
        return n >= 2 and int(self.spf[n]) == n


def build_spf_sieve(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SpfSieve:
    """Build the smallest-prime-factor table up to limit.

    Raises ResourceError when 4*(limit+1) bytes would exceed memory_budget.
    """
    if limit < 2:
        raise ValueError(f"limit must be >= 2, got {limit}")
    need = 4 * (limit + 1)
    if need > memory_budget:
        raise ResourceError(
            f"sieve of limit {limit} needs {need} bytes, budget is {memory_budget}"
        )
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    rest = np.nonzero(spf[2:] == 0)[0] + 2
    spf[rest] = rest.astype(np.uint32)
    spf[1] = 1
    spf.setflags(write=False)
    return SpfSieve(limit, spf)


def factorize(n: int, sieve: SpfSieve) -> FactoredInteger:
    """Factor n through the sieve; n must lie in [1, sieve.limit]."""
    return FactoredInteger(n, tuple(sieve.factor_list(n)))


def r4_star(d: FactoredInteger) -> int:
    """Sum of divisors of d not divisible by 4.

    Multiplicative: sigma(p^a) = (p^(a+1)-1)/(p-1) for odd p, and the
    factor for 2^a (a >= 1) is 1 + 2 = 3 since 4 | 2^b for b >= 2.
    """
    out = 1
    for p, a in d.factors:
        if p == 2:
            out *= 3
        else:
            out *= (p ** (a + 1) - 1) // (p - 1)
    return out


def r4(d: FactoredInteger) -> int:
    """Number of (y1,..,y4) in Z^4 with y1^2+..+y4^2 = d, i.e. 8*r4*(d)."""
    return 8 * r4_star(d)


def mobius(n: FactoredInteger) -> int:
    """Mobius function: 0 on non-squarefree n, else (-1)^(number of primes)."""
    for _, a in n.factors:
        if a > 1:
            return 0
    return -1 if len(n.factors) % 2 else 1


def square_divisor_pairs(
    n: FactoredInteger,
) -> Iterator[tuple[int, FactoredInteger]]:
    """Yield (m, d) for every divisor m of n^2, with d = n^4/m^2 factored.

    These are exactly the divisors d of n^4 whose cofactor n^4/d is a
    square, reparametrized so only tau(n^2) pairs are enumerated instead
    of tau(n^4) divisors filtered by a square test.
    """
    primes = [p for p, _ in n.factors]
    exps = [a for _, a in n.factors]

    def rec(i: int, m: int, d_factors: list[tuple[int, int]]):
        if i == len(primes):
            d_val = 1
            for p, e in d_factors:
                d_val *= p**e
            yield m, FactoredInteger(d_val, tuple(f for f in d_factors if f[1] > 0))
            return
        p, a = primes[i], exps[i]
        pk = 1
        for b in range(2 * a + 1):
            yield from rec(i + 1, m * pk, d_factors + [(p, 4 * a - 2 * b)])
            pk *= p

    yield from rec(0, 1, [])


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (empty for limit < 2)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def save_sieve_cache(sieve: SpfSieve, path) -> None:
    """Write the sieve in the cache format: magic, version u32, limit u64, entries u32, all little-endian."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(struct.pack("<Q", sieve.limit))
        fh.write(sieve.spf.astype("<u4").tobytes())


def load_sieve_cache(path, min_limit: int = 2) -> SpfSieve:
    """Load and validate a sieve cache file.

    Raises CacheFormatError on bad magic/version/limit or truncated data,
    and when the cached limit is below min_limit.
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CACHE_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _CACHE_VERSION:
            raise CacheFormatError(f"unsupported cache version {version}")
        (limit,) = struct.unpack("<Q", fh.read(8))
        if limit < 2:
            raise CacheFormatError(f"invalid cached limit {limit}")
        data = fh.read()
    spf = np.frombuffer(data, dtype="<u4")
    if spf.size != limit + 1:
        raise CacheFormatError(
            f"cache holds {spf.size} entries, expected {limit + 1}"
        )
    if limit < min_limit:
        raise CacheFormatError(f"cached limit {limit} below required {min_limit}")
    spf = spf.astype(np.uint32)
    # spot validation: spf[2] must be 2 and entries never exceed their index
    if int(spf[2]) != 2:
        raise CacheFormatError("cache failed validation at entry 2")
    spf.setflags(write=False)
    return SpfSieve(int(limit), spf)
