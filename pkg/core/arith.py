"""
Integer arithmetic kernel.

Smallest-prime-factor sieve, factorization with derived mu/omega/tau,
the Jacobi symbol, prime counting and the Burgess modulus classes.
Everything here is pure; a FactorTable is read-only once built and can be
shared between threads.
"""
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np

from utils.errors import UsageError

logger = logging.getLogger(__name__)

DEFAULT_SIEVE_LIMIT = 10_000_000


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Smallest prime factor for every index up to `limit`.

    Attributes:
        limit: Largest index covered (inclusive).
        spf: spf[n] is the least prime dividing n for 2 <= n <= limit;
            spf[0] = 0, spf[1] = 1.
        primes: Ascending array of all primes <= limit.
    """
    limit: int
    spf: np.ndarray
    primes: np.ndarray

    def __post_init__(self):
        self.spf.setflags(write=False)
        self.primes.setflags(write=False)

    def covers(self, n: int) -> bool:
        return 0 <= n <= self.limit

    def smallest_factor(self, n: int) -> int:
        return int(self.spf[n])

    def is_prime(self, n: int) -> bool:
        return n >= 2 and int(self.spf[n]) == n

    def spf_list(self, upto: int) -> List[int]:
        """Plain-int copy of spf[0..upto] for tight Python loops."""
        return self.spf[:upto + 1].tolist()


class RTag(Enum):
    ANY_R = "AnyR"
    RESTRICTED_R = "RestrictedR"


@dataclass(frozen=True)
class ModulusClass:
    """Which Burgess exponents r a modulus q admits."""
    tag: RTag
    q: int

    def admits(self, r: int) -> bool:
        if r < 1:
            return False
        return self.tag is RTag.ANY_R or r <= 3

    def r_cap(self, r_max: int) -> int:
        return r_max if self.tag is RTag.ANY_R else min(r_max, 3)

    def __str__(self) -> str:
        return self.tag.value


@dataclass(frozen=True)
class PrimeFactorization:
    """n together with its sorted (prime, exponent) pairs."""
    n: int
    factors: Tuple[Tuple[int, int], ...]

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def tau(self) -> int:
        return math.prod(e + 1 for _, e in self.factors)

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    @property
    def mu(self) -> int:
        if not self.is_squarefree:
            return 0
        return -1 if self.omega % 2 else 1


def build_sieve(limit: int) -> FactorTable:
    """Sieve of Eratosthenes recording the smallest prime factor."""
    if limit < 2:
        raise UsageError(f"sieve limit must be at least 2, got {limit}")

    dtype = np.int32 if limit < 2**31 else np.int64
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p

    # untouched entries are 0, 1 and the primes
    untouched = np.flatnonzero(spf == 0)
    spf[untouched] = untouched
    primes = untouched[untouched >= 2].astype(np.int64)

    logger.debug(f"Built factor table up to {limit} ({len(primes)} primes)")
    return FactorTable(limit=limit, spf=spf, primes=primes)


_default_table: Optional[FactorTable] = None
_table_lock = threading.Lock()


def default_table() -> FactorTable:
    """Process-wide table, built on first use."""
    global _default_table
    if _default_table is None:
        with _table_lock:
            if _default_table is None:
                _default_table = build_sieve(DEFAULT_SIEVE_LIMIT)
    return _default_table


def use_table(table: FactorTable) -> None:
    """Replaces the process-wide table (e.g. with a configured limit)."""
    global _default_table
    with _table_lock:
        _default_table = table


def _trial_candidates(table: FactorTable) -> Iterator[int]:
    for p in table.primes:
        yield int(p)
    # continue past the sieve with odd numbers
    k = int(table.primes[-1]) + 1
    if k % 2 == 0:
        k += 1
    while True:
        yield k
        k += 2


def factorize(n: int, table: Optional[FactorTable] = None) -> PrimeFactorization:
    """Prime factorization via the sieve, trial division above its limit."""
    if n < 1:
        raise UsageError(f"cannot factorize {n}: argument must be positive")
    table = table or default_table()

    counts = {}
    m = n
    if not table.covers(m):
        for p in _trial_candidates(table):
            if p * p > m or table.covers(m):
                break
            while m % p == 0:
                counts[p] = counts.get(p, 0) + 1
                m //= p
        if not table.covers(m):
            # remaining cofactor has no divisor below its square root
            counts[m] = counts.get(m, 0) + 1
            m = 1

    while m > 1:
        p = int(table.spf[m])
        counts[p] = counts.get(p, 0) + 1
        m //= p

    return PrimeFactorization(n=n, factors=tuple(sorted(counts.items())))


def mobius(n: int, table: Optional[FactorTable] = None) -> int:
    return factorize(n, table).mu


def omega(n: int, table: Optional[FactorTable] = None) -> int:
    return factorize(n, table).omega


def tau(n: int, table: Optional[FactorTable] = None) -> int:
    return factorize(n, table).tau


def is_squarefree(n: int, table: Optional[FactorTable] = None) -> bool:
    return factorize(n, table).is_squarefree


def squarefree_kernel(n: int, table: Optional[FactorTable] = None) -> int:
    """Product of the primes dividing n to an odd power."""
    return math.prod(p for p, e in factorize(n, table).factors if e % 2)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) by binary reciprocity; n must be odd and positive."""
    if n <= 0 or n % 2 == 0:
        raise UsageError(f"Jacobi symbol needs an odd positive modulus, got {n}")

    a %= n
    result = 1
    while a:
        while (a & 1) == 0:
            a >>= 1
            if (n & 7) in (3, 5):
                result = -result
        a, n = n, a
        if (a & 3) == 3 and (n & 3) == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def prime_list(limit: int, table: Optional[FactorTable] = None) -> np.ndarray:
    """Ascending primes <= limit."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    table = table or default_table()
    if limit > table.limit:
        logger.warning(f"prime_list({limit}) exceeds sieve limit {table.limit}; sieving temporarily")
        table = build_sieve(limit)
    return table.primes[:np.searchsorted(table.primes, limit, side='right')]


def prime_pi(x: float, table: Optional[FactorTable] = None) -> int:
    """Number of primes <= floor(x)."""
    m = math.floor(x)
    if m < 2:
        return 0
    return len(prime_list(m, table))


def classify_modulus(q: int, table: Optional[FactorTable] = None) -> ModulusClass:
    """AnyR iff q = 2^e * m with m odd and cubefree and e <= 3."""
    if q < 1:
        raise UsageError(f"modulus must be positive, got {q}")
    e = (q & -q).bit_length() - 1
    m = q >> e
    cubefree = all(k <= 2 for _, k in factorize(m, table).factors)
    tag = RTag.ANY_R if e <= 3 and cubefree else RTag.RESTRICTED_R
    return ModulusClass(tag=tag, q=q)
