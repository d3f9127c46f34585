"""
Zimmert sets and the finite form of the rank lower bound.

For squarefree d < 0, Z_d is the set of integers n with

  1. 4n^2 + 3 <= |d| and n != 2;
  2. d a quadratic non-residue modulo every odd prime factor p of n;
  3. n odd unless d = 5 (mod 8).

|Z_d| is a lower bound for the rank of the largest free quotient of the
Bianchi group of Q(sqrt(d)); nothing group-theoretic is computed here.

The corollary check evaluates, at x = sqrt(|d| - 3) / 2 and with P the
primes of Z_d, the exact inequality

    pi(x) - |Z_d| - omega(|d|) <= sum_{n <= x, (n, P) = 1} chi_d(n).
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from core.arith import FactorTable, default_table, factorize, is_squarefree, jacobi, omega, prime_list
from core.character import QuadraticCharacter, chi_values, make_character
from core.sift import SiftPrimeSet, coprime_mask, squarefree_divisors, theorem_rhs
from utils.errors import DomainError, UsageError

logger = logging.getLogger(__name__)

Real = Union[int, float, Fraction, str]


@dataclass(frozen=True)
class ZimmertSet:
    d: int
    nmax: int
    elements: Tuple[int, ...]
    prime_support: SiftPrimeSet

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, n: int) -> bool:
        return n in self.elements


@dataclass(frozen=True)
class CorollaryReport:
    d: int
    x: float
    x_floor: int
    pi_x: int
    omega_d: int
    zimmert_size: int
    prime_support: Tuple[int, ...]
    sifted: int
    sifted_primes: int
    lhs: int
    holds: bool
    nonneg_ok: bool


@dataclass(frozen=True)
class CorollaryParams:
    c: float
    c_prime: float
    R: float
    x: float
    r: int


@dataclass(frozen=True)
class CorollaryEstimate:
    params: CorollaryParams
    main: float
    tail: float
    divisor_count: int


def candidate_bound(d: int) -> int:
    """Largest n with 4n^2 + 3 <= |d| (0 if there is none)."""
    if d >= 0:
        raise UsageError(f"d must be negative, got {d}")
    m = -d
    if m < 7:
        return 0
    return math.isqrt((m - 3) // 4)


def corollary_x(d: int) -> float:
    m = abs(d)
    return 0.5 * math.sqrt(m - 3) if m >= 3 else 0.0


def _odd_prime_factors(n: int, spf: Optional[list], table: FactorTable):
    if spf is None:
        return [p for p in factorize(n, table).primes if p != 2]
    primes = []
    while n > 1:
        p = spf[n]
        if p != 2:
            primes.append(p)
        n //= p
    return primes


def zimmert_set(d: int, table: Optional[FactorTable] = None) -> ZimmertSet:
    """Enumerates Z_d for squarefree d < 0."""
    if d >= 0:
        raise DomainError(f"d must be negative, got {d}")
    table = table or default_table()
    if not is_squarefree(-d, table):
        raise DomainError(f"d must be squarefree, got {d}")

    nmax = candidate_bound(d)
    support = tuple(int(p) for p in prime_list(nmax, table) if p != 2 and jacobi(d, int(p)) == -1)
    allowed = set(support)
    even_ok = d % 8 == 5
    spf = table.spf_list(nmax) if table.covers(nmax) else None

    elements = []
    for n in range(1, nmax + 1):
        if n == 2 or (n % 2 == 0 and not even_ok):
            continue
        if all(p in allowed for p in _odd_prime_factors(n, spf, table)):
            elements.append(n)

    return ZimmertSet(d=d, nmax=nmax, elements=tuple(elements), prime_support=SiftPrimeSet(support))


def rank_lower_bound(d: int, table: Optional[FactorTable] = None) -> int:
    """|Z_d|, a lower bound (never more) for the free-quotient rank r(d)."""
    return zimmert_set(d, table).size


def corollary_report(zset: ZimmertSet,
                     chi: Optional[QuadraticCharacter] = None,
                     table: Optional[FactorTable] = None) -> CorollaryReport:
    """Corollary quantities for an already enumerated Z_d, any |d| >= 1."""
    table = table or default_table()
    d = zset.d
    chi = chi or make_character(d, table=table)
    m = zset.nmax
    P = zset.prime_support

    values = chi_values(chi, m, table)
    mask = coprime_mask(m, P)
    counted = [values[n] for n in range(1, m + 1) if mask[n]]
    sifted = sum(counted)
    nonneg_ok = all(v >= 0 for v in counted)

    primes = [int(p) for p in prime_list(m, table)]
    sifted_primes = sum(values[p] for p in primes if mask[p])

    pi_x = len(primes)
    omega_d = omega(-d, table)
    lhs = pi_x - zset.size - omega_d

    return CorollaryReport(
        d=d,
        x=corollary_x(d),
        x_floor=m,
        pi_x=pi_x,
        omega_d=omega_d,
        zimmert_size=zset.size,
        prime_support=P.primes,
        sifted=sifted,
        sifted_primes=sifted_primes,
        lhs=lhs,
        holds=lhs <= sifted,
        nonneg_ok=nonneg_ok,
    )


def corollary_check(d: int, table: Optional[FactorTable] = None) -> CorollaryReport:
    """Exact check of pi(x) - |Z_d| - omega(|d|) <= S at x = sqrt(|d| - 3) / 2."""
    if d >= 0 or -d < 7:
        raise DomainError(f"corollary check needs d <= -7, got {d}")
    report = corollary_report(zimmert_set(d, table), table=table)
    if not report.holds:
        logger.error(f"Corollary inequality fails for d={d}: {report}")
    return report


def _as_fraction(value: Real) -> Fraction:
    if isinstance(value, float):
        # shortest decimal form, so 0.24 is read as 6/25
        return Fraction(repr(value))
    return Fraction(value)


def corollary_params(d: int, c: Real, c_prime: Real) -> CorollaryParams:
    """R = |d|^c, x = sqrt(|d| - 3) / 2 and r = ceil(1 / (1 - 4c'))."""
    try:
        c_exact, c_prime_exact = _as_fraction(c), _as_fraction(c_prime)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"cannot read c={c!r}, c'={c_prime!r}", original_exception=e)
    if not 0 < c_exact < c_prime_exact < Fraction(1, 4):
        raise UsageError(f"need 0 < c < c' < 1/4, got c={c}, c'={c_prime}")
    m = abs(d)
    if d >= 0 or m < 7:
        raise DomainError(f"corollary parameters need d <= -7, got {d}")

    return CorollaryParams(
        c=float(c_exact),
        c_prime=float(c_prime_exact),
        R=m ** float(c_exact),
        x=corollary_x(d),
        r=math.ceil(1 / (1 - 4 * c_prime_exact)),
    )


def corollary_estimate(d: int, params: CorollaryParams, epsilon: float = 0.0,
                       table: Optional[FactorTable] = None) -> CorollaryEstimate:
    """Reference terms of the sifted-sum estimate at the corollary's parameters."""
    zset = zimmert_set(d, table)
    P = zset.prime_support
    main, tail = theorem_rhs(4 * abs(d), params.x, params.R, params.r, P, epsilon)
    divisor_count = sum(1 for _ in squarefree_divisors(P.primes, math.floor(params.x), lower=params.R))
    return CorollaryEstimate(params=params, main=main, tail=tail, divisor_count=divisor_count)
