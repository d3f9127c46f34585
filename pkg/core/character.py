"""
Quadratic character attached to an imaginary quadratic radicand.

For squarefree d < 0 the character is chi(n) = (d/n) for odd n and
chi(n) = 0 for even n; it is totally multiplicative and periodic modulo
q = 4|d|. Evaluation goes through the Jacobi symbol; a one-period memo
table can be built eagerly for repeated evaluation.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.arith import FactorTable, default_table, is_squarefree, jacobi
from utils.errors import DomainError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_MEMO_LIMIT = 1_000_000


@dataclass(frozen=True, eq=False)
class QuadraticCharacter:
    d: int
    q: int
    principal: bool = False
    memo: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, n: int) -> int:
        return chi_eval(self, n)

    def as_residue_character(self) -> "ResidueCharacter":
        return ResidueCharacter(self.q, tuple(chi_values(self, self.q - 1)))


@dataclass(frozen=True)
class ResidueCharacter:
    """A real-valued function on residues mod `modulus`, given by its table.

    values[a] is the value at every n = a (mod modulus). Multiplicativity is
    not checked.
    """
    modulus: int
    values: Tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise UsageError(f"modulus must be positive, got {self.modulus}")
        if len(self.values) != self.modulus:
            raise UsageError(f"expected {self.modulus} values, got {len(self.values)}")
        if any(v not in (-1, 0, 1) for v in self.values):
            raise UsageError("character values must lie in {-1, 0, 1}")

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]

    @classmethod
    def principal(cls, q: int) -> "ResidueCharacter":
        return cls(q, tuple(1 if math.gcd(a, q) == 1 else 0 for a in range(q)))

    @classmethod
    def jacobi_symbol(cls, m: int) -> "ResidueCharacter":
        """n -> (n/m) for odd m, a real character mod m."""
        return cls(m, tuple(jacobi(a, m) for a in range(m)))

    @classmethod
    def from_values(cls, q: int, values: Sequence[int]) -> "ResidueCharacter":
        return cls(q, tuple(int(v) for v in values))


def _fill_values(d: int, upto: int, table: FactorTable) -> List[int]:
    """chi(0..upto) using chi(mn) = chi(m)chi(n); Jacobi symbols at primes only."""
    values = [0] * (upto + 1)
    if upto >= 1:
        values[1] = 1
    if upto <= table.limit:
        spf = table.spf_list(upto)
        for n in range(2, upto + 1):
            p = spf[n]
            if p == n:
                values[n] = 0 if n == 2 else jacobi(d, n)
            else:
                values[n] = values[p] * values[n // p]
    else:
        for n in range(3, upto + 1, 2):
            values[n] = jacobi(d, n)
    return values


def make_character(d: int,
                   memoize: bool = False,
                   memo_limit: int = DEFAULT_MEMO_LIMIT,
                   table: Optional[FactorTable] = None) -> QuadraticCharacter:
    """The quadratic character of the squarefree radicand d < 0."""
    if d >= 0:
        raise DomainError(f"d must be negative, got {d}")
    if not is_squarefree(-d, table):
        raise DomainError(f"d must be squarefree, got {d}")

    q = 4 * abs(d)
    memo = None
    if memoize and q <= memo_limit:
        memo = np.array(_fill_values(d, q - 1, table or default_table()), dtype=np.int8)
        memo.setflags(write=False)
        logger.debug(f"Memoized chi_{d} over one period ({q} residues)")
    return QuadraticCharacter(d=d, q=q, memo=memo)


def chi_eval(chi: QuadraticCharacter, n: int) -> int:
    if n < 1:
        raise UsageError(f"character argument must be positive, got {n}")
    if chi.memo is not None:
        return int(chi.memo[n % chi.q])
    if n % 2 == 0:
        return 0
    return jacobi(chi.d, n)


def chi_values(chi: QuadraticCharacter, upto: int, table: Optional[FactorTable] = None) -> List[int]:
    """[chi(0), chi(1), ..., chi(upto)] with chi(0) = 0."""
    if upto < 0:
        return []
    if chi.memo is not None:
        reps, rest = divmod(upto + 1, chi.q)
        values = chi.memo.tolist()
        return values * reps + values[:rest]
    return _fill_values(chi.d, upto, table or default_table())


def partial_sum(chi: QuadraticCharacter, x: float, table: Optional[FactorTable] = None) -> int:
    """Sum of chi(n) over 1 <= n <= floor(x)."""
    m = math.floor(x)
    if m < 1:
        return 0
    return sum(chi_values(chi, m, table))


def max_partial_sum(chi: QuadraticCharacter, x: float, table: Optional[FactorTable] = None) -> int:
    """max over y <= x of |sum_{n <= y} chi(n)|."""
    m = math.floor(x)
    best = running = 0
    for value in chi_values(chi, max(m, 0), table)[1:]:
        running += value
        best = max(best, abs(running))
    return best


def split_sum_check(psi1: ResidueCharacter, psi2: ResidueCharacter, x: float) -> Tuple[int, int]:
    """Both sides of the splitting identity for chi = psi1 * psi2.

    lhs = sum_{n <= x} psi1(n) psi2(n)
    rhs = sum_{a <= q1, (a, q1) = 1} psi1(a) sum_{n <= x, n = a mod q1} psi2(n)

    The two agree whenever psi1 vanishes off the units mod q1, which holds
    for every genuine character.
    """
    q1, q2 = psi1.modulus, psi2.modulus
    if math.gcd(q1, q2) != 1:
        raise DomainError(f"moduli {q1} and {q2} are not coprime")

    m = max(math.floor(x), 0)
    lhs = sum(psi1(n) * psi2(n) for n in range(1, m + 1))
    rhs = 0
    for a in range(1, q1 + 1):
        if math.gcd(a, q1) != 1 or psi1(a) == 0:
            continue
        rhs += psi1(a) * sum(psi2(n) for n in range(a, m + 1, q1))
    return lhs, rhs
