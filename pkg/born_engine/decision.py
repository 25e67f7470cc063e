"""
The decision-theoretic route to the expectation value.

Instead of assuming V is an expectation over channel weights, V is treated as
the value of a game and pinned down by relations between models: consistency
edges (V(g) = V(g')), the zero-sum rule (V[psi, X, Omega] = -V[psi, X, -Omega])
and, for additive payoffs, the payoff shift
(V[psi, X, Omega o f_k] = V[psi, X, Omega] + Omega(k) with f_k(x) = x + k).
The relations are collected in a ValueLedger and solved exactly.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from born_engine import settings
from born_engine.equivalence import (
    ConstraintEdge,
    has_equal_norms,
    stern_gerlach_chain,
    transposition_chain,
)
from born_engine.errors import (
    NonAdditivePayoffError,
    PreconditionViolatedError,
)
from born_engine.linalg import LinearEquation, LinearSystem, RankReport, uniqueness_analysis
from born_engine.model import (
    ExperimentalModel,
    PayoffMap,
    WeightVector,
    random_model,
    weight_value,
)

logger = logging.getLogger(__name__)

WeightRule = Callable[[ExperimentalModel], WeightVector]


@dataclass(frozen=True)
class GameValueConstraint:
    """a * V(applied_to) + b * V(related) = rhs"""

    kind: str  # "Consistency", "ZeroSum" or "PayoffShift"
    applied_to: ExperimentalModel
    related: ExperimentalModel
    coefficients: Tuple[Fraction, Fraction]
    rhs: Fraction = Fraction(0)
    shift: Optional[Fraction] = None

    @property
    def induced_equation(self) -> str:
        a, b = self.coefficients
        sign = "+" if b > 0 else "-"
        return f"{a} V(g) {sign} {abs(b)} V(g') = {self.rhs}"


class ValueLedger:
    """V-values of models as unknowns, with the relations found between them"""

    def __init__(self):
        self.models: List[ExperimentalModel] = []
        self.constraints: List[GameValueConstraint] = []

    def index(self, g: ExperimentalModel) -> int:
        for i, known in enumerate(self.models):
            if known == g:
                return i
            if (
                not (known.is_exact and g.is_exact)
                and known.observable == g.observable
                and known.payoff == g.payoff
                and known.psi.is_close(g.psi)
            ):
                return i
        self.models.append(g)
        return len(self.models) - 1

    def _relation(self, kind, g, h, coeff_g, coeff_h, rhs, shift=None) -> GameValueConstraint:
        self.index(g)
        self.index(h)
        constraint = GameValueConstraint(
            kind, g, h, (Fraction(coeff_g), Fraction(coeff_h)), Fraction(rhs), shift
        )
        self.constraints.append(constraint)
        return constraint

    def add_consistency(self, edge: ConstraintEdge) -> GameValueConstraint:
        """V(source) - V(target) = 0"""
        return self._relation("Consistency", edge.source, edge.target, 1, -1, 0)

    def add_zero_sum(self, g: ExperimentalModel) -> GameValueConstraint:
        """V(g) + V(g with -Omega) = 0"""
        return self._relation("ZeroSum", g, g.with_payoff(g.payoff.negated()), 1, 1, 0)

    def add_payoff_shift(self, g: ExperimentalModel, k) -> GameValueConstraint:
        """V(g with Omega o f_k) - V(g) = Omega(k), Omega additive"""
        k = Fraction(k)
        slope = g.payoff.linear_coefficient()
        if slope is None:
            raise NonAdditivePayoffError(f"payoff {g.payoff.entries} is not of the form a*x")
        shifted = shifted_payoff_model(g, k)
        return self._relation("PayoffShift", shifted, g, 1, -1, slope * k, shift=k)

    def system(self) -> LinearSystem:
        n = len(self.models)
        equations = []
        for c in self.constraints:
            i, j = self.index(c.applied_to), self.index(c.related)
            a, b = c.coefficients
            coeffs = [Fraction(0)] * n
            coeffs[i] += a
            coeffs[j] += b
            equations.append(LinearEquation(tuple(coeffs), c.rhs, c.kind))
        return LinearSystem(tuple(f"V{i + 1}" for i in range(n)), tuple(equations))

    def solve(self) -> RankReport:
        return uniqueness_analysis(self.system())

    def value(self, g: ExperimentalModel) -> Optional[Fraction]:
        """V(g) if the recorded relations determine it, else None"""
        i = self.index(g)
        report = self.solve()
        coeffs = [0] * len(self.models)
        coeffs[i] = 1
        if not report.determines(coeffs):
            return None
        return report.value_of(coeffs)


@dataclass(frozen=True)
class DecisionValue:
    value: Fraction
    constraints: Tuple[GameValueConstraint, ...]


def shifted_payoff_model(g: ExperimentalModel, k) -> ExperimentalModel:
    """<psi, X, Omega o f_k> with f_k(x) = x + k"""
    k = Fraction(k)
    slope = g.payoff.linear_coefficient()
    if slope is None:
        raise NonAdditivePayoffError(f"payoff {g.payoff.entries} is not of the form a*x")
    return g.with_payoff(PayoffMap(tuple((lam, slope * (lam + k)) for lam in g.payoff.domain())))


def _check_two_channel(g: ExperimentalModel):
    if g.dim != 2:
        raise PreconditionViolatedError(f"the decision path needs d = 2, got {g.dim}")
    if not has_equal_norms(g):
        raise PreconditionViolatedError(
            f"|c_k|^2 = {[str(m) for m in g.psi.mag2s()]} are not equal and nonzero"
        )


def _resolve(ledger: ValueLedger, g: ExperimentalModel) -> DecisionValue:
    value = ledger.value(g)
    if value is None:
        raise PreconditionViolatedError("the recorded relations do not determine V")
    logger.info(f"V = {value} from {len(ledger.constraints)} relations")
    return DecisionValue(value, tuple(ledger.constraints))


def derive_spin_value(g: ExperimentalModel) -> DecisionValue:
    """V = 0 for a symmetric two-channel game.

    Needs d = 2, equal norms, lambda_2 = -lambda_1 and a payoff with
    Omega(-x) = -Omega(x) (the identity payoff in particular). The two-channel
    chain gives V(g) = V(<psi, X, Omega o -I>) = V(<psi, X, -Omega>), and the
    zero-sum rule gives V(g) = -V(<psi, X, -Omega>).
    """
    _check_two_channel(g)
    lam1, lam2 = g.observable.eigenvalues
    if lam1 != -lam2 or lam1 == 0:
        raise PreconditionViolatedError(f"spectrum ({lam1}, {lam2}) is not symmetric")
    if any(g.payoff(-lam) != -g.payoff(lam) for lam in (lam1, lam2)):
        raise PreconditionViolatedError("payoff is not odd on the spectrum")

    ledger = ValueLedger()
    for edge in stern_gerlach_chain(g):
        ledger.add_consistency(edge)
    ledger.add_zero_sum(g)
    return _resolve(ledger, g)


def derive_equal_norm_d2(g: ExperimentalModel) -> DecisionValue:
    """V = (Omega(lambda_1) + Omega(lambda_2)) / 2 for equal norms and additive Omega.

    With k = -lambda_1 - lambda_2 the map -I o f_k exchanges the two
    eigenvalues, so <psi, X, Omega o f_k> is the zero-sum partner of the
    transposed model <psi, X, Omega o pi>, which is consistent with g.
    """
    _check_two_channel(g)
    lam1, lam2 = g.observable.eigenvalues
    if lam1 == lam2:
        raise PreconditionViolatedError("the two eigenvalues coincide")
    if g.payoff.linear_coefficient() is None:
        raise NonAdditivePayoffError(f"payoff {g.payoff.entries} is not of the form a*x")

    ledger = ValueLedger()
    chain = transposition_chain(g, 0, 1)
    for edge in chain:
        ledger.add_consistency(edge)
    ledger.add_payoff_shift(g, -lam1 - lam2)
    ledger.add_zero_sum(chain[-1].target)
    return _resolve(ledger, g)


def born_rule(g: ExperimentalModel) -> WeightVector:
    return WeightVector.born(g)


@dataclass(frozen=True)
class RuleCheck:
    passed: bool
    checked: int
    witness: Optional[ExperimentalModel] = None
    detail: str = ""


def _same_value(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= settings.FLOAT_TOL * max(1.0, abs(float(a)), abs(float(b)))


def _rule_value(rule: WeightRule, g: ExperimentalModel):
    return weight_value(g, rule(g))


def check_zero_sum(
    rule: WeightRule, models: Optional[Sequence[ExperimentalModel]] = None, count: int = 50, seed: int = 0
) -> RuleCheck:
    """V[psi, X, Omega] = -V[psi, X, -Omega] for V = sum_k rule(g)_k Omega(lambda_k)"""
    if models is None:
        rng = np.random.default_rng(seed)
        models = [random_model(rng) for _ in range(count)]
    for g in models:
        value = _rule_value(rule, g)
        mirrored = _rule_value(rule, g.with_payoff(g.payoff.negated()))
        if not _same_value(value, -mirrored):
            return RuleCheck(False, len(models), g, f"V = {value}, -V(-Omega) = {-mirrored}")
    return RuleCheck(True, len(models))


def _additive_model(rng: np.random.Generator, k: Fraction) -> Optional[ExperimentalModel]:
    g = random_model(rng)
    spectrum = g.observable.spectrum()
    if any(lam == 0 or lam + k == 0 for lam in spectrum):
        return None
    slope = Fraction(int(rng.choice((-3, -2, -1, 1, 2, 3))), int(rng.integers(1, 4)))
    return g.with_payoff(PayoffMap.linear(slope, spectrum))


def check_additivity(
    rule: WeightRule, k=1, models: Optional[Sequence[ExperimentalModel]] = None, count: int = 50, seed: int = 0
) -> RuleCheck:
    """V[psi, X, Omega o f_k] = V[psi, X, Omega] + Omega(k) on additive payoffs"""
    k = Fraction(k)
    if models is None:
        rng = np.random.default_rng(seed)
        models = []
        while len(models) < count:
            g = _additive_model(rng, k)
            if g is not None:
                models.append(g)
    for g in models:
        slope = g.payoff.linear_coefficient()
        if slope is None:
            raise NonAdditivePayoffError(f"payoff {g.payoff.entries} is not of the form a*x")
        value = _rule_value(rule, g)
        shifted = _rule_value(rule, shifted_payoff_model(g, k))
        if not _same_value(shifted, value + slope * k):
            return RuleCheck(False, len(models), g, f"V(shifted) = {shifted}, V + Omega(k) = {value + slope * k}")
    return RuleCheck(True, len(models))


def admissible_d2_model(rng: np.random.Generator) -> ExperimentalModel:
    """A random model meeting the preconditions of derive_equal_norm_d2"""
    while True:
        lam1 = Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))
        lam2 = Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4)))
        if lam1 != lam2 and lam1 != 0 and lam2 != 0:
            break
    mag2 = Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 13)))
    phases = [Fraction(int(rng.integers(0, 12)), 12) for _ in range(2)]
    slope = Fraction(int(rng.choice((-3, -2, -1, 1, 2, 3))), int(rng.integers(1, 4)))
    payoff = PayoffMap.linear(slope, (lam1, lam2))
    return ExperimentalModel.build([mag2, mag2], [lam1, lam2], payoff.as_dict(), phases)
