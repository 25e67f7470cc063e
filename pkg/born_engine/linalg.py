"""
Exact rational linear systems over weight unknowns and their uniqueness
analysis.

Elimination is fraction-free: every equation is scaled to integer
coefficients, rows are combined as ``p * row - a * pivot_row`` and divided by
their content, and the pivot is always the first nonzero entry of the column,
so results are reproducible bit for bit.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from born_engine.errors import DimensionMismatchError, InconsistentSystemError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearEquation:
    """sum_i coeffs[i] * x_i = rhs"""

    coeffs: Tuple[Fraction, ...]
    rhs: Fraction = Fraction(0)
    tag: str = ""
    provenance: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    @classmethod
    def equality(cls, n: int, j: int, k: int, tag: str = "", provenance=()) -> "LinearEquation":
        """x_j - x_k = 0"""
        coeffs = [Fraction(0)] * n
        coeffs[j] += 1
        coeffs[k] -= 1
        return cls(tuple(coeffs), Fraction(0), tag, tuple(provenance))

    @classmethod
    def normalization(cls, n: int, weights: Optional[Sequence] = None, tag: str = "sum w_k = 1"):
        """sum_k m_k x_k = 1 (m_k = 1 unless given)"""
        weights = weights if weights is not None else [1] * n
        return cls(tuple(Fraction(m) for m in weights), Fraction(1), tag)

    def evaluate(self, values: Sequence) -> Fraction:
        return sum((c * Fraction(v) for c, v in zip(self.coeffs, values)), Fraction(0))

    def is_satisfied_by(self, values: Sequence) -> bool:
        return self.evaluate(values) == self.rhs

    def normalized(self) -> "LinearEquation":
        """Scale so the first nonzero coefficient is 1 (for comparisons)"""
        lead = next((c for c in self.coeffs if c != 0), None)
        if lead is None:
            return self
        return LinearEquation(
            tuple(c / lead for c in self.coeffs), self.rhs / lead, self.tag, self.provenance
        )


@dataclass(frozen=True)
class LinearSystem:
    unknowns: Tuple[str, ...]
    equations: Tuple[LinearEquation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        object.__setattr__(self, "equations", tuple(self.equations))
        for eq in self.equations:
            if len(eq.coeffs) != len(self.unknowns):
                raise DimensionMismatchError(
                    f"equation {eq.tag!r} has {len(eq.coeffs)} coefficients for {len(self.unknowns)} unknowns"
                )

    @classmethod
    def over_weights(cls, n: int, equations: Sequence[LinearEquation] = ()) -> "LinearSystem":
        return cls(tuple(f"w{k + 1}" for k in range(n)), tuple(equations))

    @property
    def n(self) -> int:
        return len(self.unknowns)

    def covers_unknowns(self) -> bool:
        return all(any(eq.coeffs[i] != 0 for eq in self.equations) for i in range(self.n))

    def is_satisfied_by(self, values: Sequence) -> bool:
        return all(eq.is_satisfied_by(values) for eq in self.equations)

    def extended(self, equations: Sequence[LinearEquation]) -> "LinearSystem":
        return LinearSystem(self.unknowns, self.equations + tuple(equations))


@dataclass(frozen=True)
class RankReport:
    rank: int
    solution_dim: int
    particular: Tuple[Fraction, ...]
    null_space: Tuple[Tuple[Fraction, ...], ...]
    pivots: Tuple[int, ...]

    @property
    def unique(self) -> bool:
        return self.solution_dim == 0

    def determines(self, coeffs: Sequence) -> bool:
        """True if sum_i coeffs[i] x_i takes one value on the whole solution set"""
        return all(
            sum((Fraction(c) * v for c, v in zip(coeffs, vec)), Fraction(0)) == 0
            for vec in self.null_space
        )

    def value_of(self, coeffs: Sequence) -> Fraction:
        return sum((Fraction(c) * v for c, v in zip(coeffs, self.particular)), Fraction(0))


def _integer_row(eq: LinearEquation) -> List[int]:
    values = list(eq.coeffs) + [eq.rhs]
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return _primitive([int(v * scale) for v in values])


def _primitive(row: List[int]) -> List[int]:
    content = 0
    for v in row:
        content = math.gcd(content, v)
    if content > 1:
        row = [v // content for v in row]
    return row


def _echelon(rows: List[List[int]], n: int) -> Tuple[List[List[int]], List[int]]:
    """Fraction-free forward elimination on the first n columns"""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        p = rows[r][c]
        for i in range(r + 1, len(rows)):
            a = rows[i][c]
            if a == 0:
                continue
            rows[i] = _primitive([p * x - a * y for x, y in zip(rows[i], rows[r])])
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def _back_substitute(rows, pivots, n, rhs_column: bool, free_values) -> List[Fraction]:
    x = [Fraction(0)] * n
    for col, value in free_values.items():
        x[col] = Fraction(value)
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        row = rows[r]
        total = Fraction(row[n]) if rhs_column else Fraction(0)
        for j in range(c + 1, n):
            if row[j]:
                total -= row[j] * x[j]
        x[c] = total / row[c]
    return x


def uniqueness_analysis(sys: LinearSystem) -> RankReport:
    """Exact rank, solution-space dimension, particular solution and null space.

    The particular solution sets every free unknown to zero. Raises
    InconsistentSystemError if the equations have no common solution.
    """
    n = sys.n
    rows = [_integer_row(eq) for eq in sys.equations]
    rows, pivots = _echelon(rows, n)
    rank = len(pivots)
    for row in rows[rank:]:
        if row[n] != 0:
            raise InconsistentSystemError(
                f"system over {', '.join(sys.unknowns)} has no solution (0 = {row[n]})"
            )
    free = [c for c in range(n) if c not in pivots]
    particular = _back_substitute(rows, pivots, n, True, {})
    null_space = []
    for f in free:
        values = {g: (1 if g == f else 0) for g in free}
        null_space.append(tuple(_back_substitute(rows, pivots, n, False, values)))
    logger.debug(f"Rank {rank} over {n} unknowns, {len(sys.equations)} equations")
    return RankReport(rank, n - rank, tuple(particular), tuple(null_space), tuple(pivots))
