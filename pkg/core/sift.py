"""
Sifted character sums.

A sifted sum runs over n <= x coprime to every prime of a set P. With the
truncated Moebius weight w(n) = sum_{t <= R, t | (n, P)} mu(t) it splits
exactly as

    S = sum_{n <= x} chi(n) w(n)  -  sum_{n <= x, (n, P) > 1} chi(n) w(n)
      = sigma1 - sigma2,

and sigma1 can be rewritten as sum_{t <= R, t | P} mu(t) chi(t) S(x / t).
All of these are computed as exact integers. The Burgess-type bounds are
evaluated as reference magnitudes only: their implied constants are unknown.

P is always carried by its prime support; the product itself is never
formed.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from core.arith import FactorTable, ModulusClass, classify_modulus, default_table, factorize
from core.character import QuadraticCharacter, chi_values
from utils.errors import DomainError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SiftPrimeSet:
    """Sorted distinct primes standing in for the squarefree integer P."""
    primes: Tuple[int, ...] = ()

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.primes, self.primes[1:])):
            raise UsageError("sieve primes must be strictly increasing")

    @classmethod
    def of(cls, primes: Iterable[int], table: Optional[FactorTable] = None) -> "SiftPrimeSet":
        ordered = tuple(sorted(set(int(p) for p in primes)))
        for p in ordered:
            if p < 2 or factorize(p, table).factors != ((p, 1),):
                raise UsageError(f"{p} is not prime")
        return cls(ordered)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes)

    def divides(self, n: int) -> bool:
        """True iff gcd(n, P) > 1."""
        return any(n % p == 0 for p in self.primes)

    def primes_dividing(self, n: int) -> Tuple[int, ...]:
        return tuple(p for p in self.primes if n % p == 0)

    def gcd_with(self, n: int) -> int:
        return math.prod(self.primes_dividing(n))


@dataclass(frozen=True)
class BurgessParams:
    q: int
    x: float
    r: int
    modulus_class: ModulusClass
    epsilon: float = 0.0

    @classmethod
    def for_modulus(cls, q: int, x: float, r: int, epsilon: float = 0.0,
                    table: Optional[FactorTable] = None) -> "BurgessParams":
        return cls(q=q, x=x, r=r, modulus_class=classify_modulus(q, table), epsilon=epsilon)


@dataclass(frozen=True)
class SiftedSumReport:
    d: int
    x: float
    R: float
    sigma1_direct: int
    sigma1_interchanged: int
    sigma2: int
    sifted: int
    burgess_reference: float
    tail_reference: float
    r_used: int
    R_in_range: bool

    @property
    def identity_holds(self) -> bool:
        return (self.sifted == self.sigma1_direct - self.sigma2
                and self.sigma1_direct == self.sigma1_interchanged)


def squarefree_divisors(primes: Sequence[int], upper: float, lower: float = 0) -> Iterator[Tuple[int, int]]:
    """(t, mu(t)) for squarefree products t of `primes` with lower < t <= upper.

    Depth-first product walk over the sorted primes; a branch stops as soon
    as its product exceeds `upper`, so the cost follows the number of
    products below the bound rather than 2^len(primes).
    """
    if upper < 1:
        return
    stack = [(0, 1, 1)]
    while stack:
        start, t, sign = stack.pop()
        if t > lower:
            yield t, sign
        children = []
        for i in range(start, len(primes)):
            nt = t * primes[i]
            if nt > upper:
                break
            children.append((i + 1, nt, -sign))
        stack.extend(reversed(children))


def _truncated_weight(divisors: Sequence[int], R: float) -> int:
    return sum(mu for _, mu in squarefree_divisors(divisors, R))


def inner_sieve_weight(n: int, P: SiftPrimeSet, R: float) -> int:
    """sum of mu(t) over t <= R with t | gcd(n, P)."""
    return _truncated_weight(P.primes_dividing(n), R)


def coprime_mask(m: int, P: SiftPrimeSet) -> bytearray:
    """mask[n] = 1 iff 1 <= n <= m and gcd(n, P) = 1."""
    mask = bytearray([1]) * (m + 1)
    mask[0] = 0
    for p in P.primes:
        if p > m:
            break
        mask[p::p] = bytes(len(range(p, m + 1, p)))
    return mask


def _divisor_lists(m: int, P: SiftPrimeSet) -> List[List[int]]:
    divisors: List[List[int]] = [[] for _ in range(m + 1)]
    for p in P.primes:
        if p > m:
            break
        for k in range(p, m + 1, p):
            divisors[k].append(p)
    return divisors


def sifted_sum(chi: QuadraticCharacter, x: float, P: SiftPrimeSet,
               table: Optional[FactorTable] = None) -> int:
    """sum of chi(n) over n <= floor(x) with gcd(n, P) = 1."""
    m = math.floor(x)
    if m < 1:
        return 0
    values = chi_values(chi, m, table)
    mask = coprime_mask(m, P)
    return sum(v for v, keep in zip(values, mask) if keep)


def burgess_term(params: BurgessParams) -> float:
    """x^(1 - 1/r) * q^((r + 1) / (4 r^2) + epsilon)."""
    r = params.r
    if not params.modulus_class.admits(r):
        raise DomainError(f"r={r} is not admissible for modulus {params.q} ({params.modulus_class})")
    if params.x < 1:
        raise UsageError(f"x must be at least 1, got {params.x}")
    return params.x ** (1 - 1 / r) * params.q ** ((r + 1) / (4 * r * r) + params.epsilon)


def optimal_r(q: int, x: float, modulus_class: ModulusClass, r_max: int,
              epsilon: float = 0.0) -> Tuple[int, float]:
    """Admissible r <= r_max minimizing burgess_term; ties go to the smaller r."""
    if r_max < 1:
        raise UsageError(f"r_max must be at least 1, got {r_max}")
    best_r, best = 1, math.inf
    for r in range(1, modulus_class.r_cap(r_max) + 1):
        bound = burgess_term(BurgessParams(q, x, r, modulus_class, epsilon))
        if bound < best:
            best_r, best = r, bound
    return best_r, best


def theorem_rhs(q: int, x: float, R: float, r: int, P: SiftPrimeSet,
                epsilon: float = 0.0,
                modulus_class: Optional[ModulusClass] = None) -> Tuple[float, float]:
    """(main, tail) of the sifted-sum estimate.

    main = x^(1 - 1/r) R^(1/r) q^((r + 1) / (4 r^2) + epsilon)
    tail = x^(1 + epsilon) * sum of 1/t over squarefree t | P, R < t <= x
    """
    modulus_class = modulus_class or classify_modulus(q)
    if not modulus_class.admits(r):
        raise DomainError(f"r={r} is not admissible for modulus {q} ({modulus_class})")
    if R < 1 or x < 1:
        raise UsageError(f"need 1 <= R and 1 <= x, got R={R}, x={x}")

    main = x ** (1 - 1 / r) * R ** (1 / r) * q ** ((r + 1) / (4 * r * r) + epsilon)
    reciprocal = sum((Fraction(1, t) for t, _ in squarefree_divisors(P.primes, math.floor(x), lower=R)),
                     Fraction(0))
    tail = x ** (1 + epsilon) * float(reciprocal)
    return main, tail


def reduced_modulus_bound(q1: int, q2: int, x: float, r: int, epsilon: float = 0.0) -> float:
    """q1 (x / q1)^(1 - 1/r) q2^((r + 1) / (4 r^2) + epsilon), for chi = chi1 chi2 mod q1 q2."""
    if math.gcd(q1, q2) != 1:
        raise DomainError(f"moduli {q1} and {q2} are not coprime")
    if not classify_modulus(q2).admits(r):
        raise DomainError(f"r={r} is not admissible for modulus {q2}")
    return q1 * (x / q1) ** (1 - 1 / r) * q2 ** ((r + 1) / (4 * r * r) + epsilon)


def large_gcd_count(x: float, P: SiftPrimeSet, R: float) -> int:
    """#{n <= x : gcd(n, P) > R}."""
    m = math.floor(x)
    return sum(1 for divisors in _divisor_lists(max(m, 0), P)[1:] if math.prod(divisors) > R)


def large_gcd_count_bound(x: float, P: SiftPrimeSet, R: float) -> int:
    """sum of floor(x / t) over squarefree t | P with R < t <= x."""
    m = math.floor(x)
    return sum(m // t for t, _ in squarefree_divisors(P.primes, m, lower=R))


def decompose(chi: QuadraticCharacter, x: float, P: SiftPrimeSet, R: float,
              r: Optional[int] = None,
              r_max: int = 10,
              epsilon: float = 0.0,
              table: Optional[FactorTable] = None) -> SiftedSumReport:
    """Exact sigma1 / sigma2 split of the sifted sum, with reference bounds.

    R below 2 or above x is outside the range the estimate is stated for;
    the identities still hold and the report flags it via R_in_range.
    """
    if R < 1:
        raise UsageError(f"R must be at least 1, got {R}")
    if r is not None and r < 1:
        raise DomainError(f"r must be a positive integer, got {r}")
    table = table or default_table()
    m = max(math.floor(x), 0)

    values = chi_values(chi, m, table)
    prefix = list(itertools.accumulate(values))
    divisors = _divisor_lists(m, P)

    sigma1 = sigma2 = 0
    for n in range(1, m + 1):
        if values[n] == 0:
            continue
        if not divisors[n]:
            sigma1 += values[n]
            continue
        term = values[n] * _truncated_weight(divisors[n], R)
        sigma1 += term
        sigma2 += term

    # (t m') runs over n with t | n: sum_n chi(n) w(n) = sum_t mu(t) chi(t) S(x/t)
    interchanged = sum(mu * values[t] * prefix[m // t]
                       for t, mu in squarefree_divisors(P.primes, min(R, m)))

    sifted = sifted_sum(chi, x, P, table)

    burgess_reference = tail_reference = 0.0
    r_used = r if r is not None else 1
    if x >= 1:
        modulus_class = classify_modulus(chi.q, table)
        if r is None:
            r_used, _ = optimal_r(chi.q, x, modulus_class, r_max, epsilon)
        burgess_reference, tail_reference = theorem_rhs(chi.q, x, R, r_used, P, epsilon, modulus_class)

    report = SiftedSumReport(
        d=chi.d, x=x, R=R,
        sigma1_direct=sigma1,
        sigma1_interchanged=interchanged,
        sigma2=sigma2,
        sifted=sifted,
        burgess_reference=burgess_reference,
        tail_reference=tail_reference,
        r_used=r_used,
        R_in_range=2 <= R <= x,
    )
    if not report.identity_holds:
        logger.error(f"Decomposition mismatch for d={chi.d}, x={x}, R={R}: {report}")
    return report
