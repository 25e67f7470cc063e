"""
Experimental models <psi, X, Omega>, multiple-channel experiments, the
realization relation between them, and the two expectation evaluators
(the Born value and the weight-based value).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from born_engine import settings
from born_engine.core import (
    Amplitude,
    Isometry,
    Mode,
    Observable,
    StateVector,
    apply_isometry,
    exact_sum,
    inner_product,
)
from born_engine.errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    InvalidModelError,
    InvalidPartitionError,
    InvalidWeightsError,
    ZeroStateError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PayoffMap:
    """Omega: eigenvalue -> nonzero outcome numeral"""

    entries: Tuple[Tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        items = self.entries.items() if isinstance(self.entries, Mapping) else self.entries
        table = {}
        for lam, outcome in items:
            lam, outcome = Fraction(lam), Fraction(outcome)
            if outcome == 0:
                raise InvalidModelError(f"outcome for eigenvalue {lam} is zero")
            if lam in table and table[lam] != outcome:
                raise InvalidModelError(f"eigenvalue {lam} mapped to two outcomes")
            table[lam] = outcome
        object.__setattr__(self, "entries", tuple(sorted(table.items())))

    @classmethod
    def from_dict(cls, table: Mapping) -> "PayoffMap":
        return cls(tuple(table.items()))

    @classmethod
    def linear(cls, slope, spectrum: Iterable) -> "PayoffMap":
        """Additive payoff Omega(x) = slope * x on the given eigenvalues"""
        slope = Fraction(slope)
        return cls(tuple((lam, slope * Fraction(lam)) for lam in spectrum))

    def as_dict(self) -> Dict[Fraction, Fraction]:
        return dict(self.entries)

    def __call__(self, lam) -> Fraction:
        table = self.as_dict()
        lam = Fraction(lam)
        if lam not in table:
            raise InvalidModelError(f"payoff undefined for eigenvalue {lam}")
        return table[lam]

    def domain(self) -> Tuple[Fraction, ...]:
        return tuple(lam for lam, _ in self.entries)

    def outcomes(self) -> Tuple[Fraction, ...]:
        return tuple(sorted({u for _, u in self.entries}))

    def restricted(self, spectrum: Iterable) -> "PayoffMap":
        table = self.as_dict()
        return PayoffMap(tuple((lam, table[lam]) for lam in spectrum))

    def negated(self) -> "PayoffMap":
        return PayoffMap(tuple((lam, -u) for lam, u in self.entries))

    def linear_coefficient(self) -> Optional[Fraction]:
        """a if Omega(x) = a*x on the whole domain, else None"""
        slopes = {u / lam for lam, u in self.entries if lam != 0}
        if len(slopes) != 1 or any(lam == 0 for lam, _ in self.entries):
            return None
        return slopes.pop()


@dataclass(frozen=True)
class ExperimentalModel:
    """The triple <psi, X, Omega>; psi need not be normalized"""

    psi: StateVector
    observable: Observable
    payoff: PayoffMap

    def __post_init__(self):
        if self.psi.dim != self.observable.dim:
            raise DimensionMismatchError(
                f"state has dimension {self.psi.dim}, observable {self.observable.dim}"
            )
        spectrum = self.observable.spectrum()
        missing = [lam for lam in spectrum if lam not in self.payoff.as_dict()]
        if missing:
            raise InvalidModelError(f"payoff undefined on eigenvalues {missing}")
        norm2 = self.psi.norm2()
        if norm2 == 0:
            raise ZeroStateError("<psi, psi> = 0")
        object.__setattr__(self, "payoff", self.payoff.restricted(spectrum))

    @classmethod
    def build(cls, mag2s: Sequence, eigenvalues: Sequence, payoff: Mapping, phases=None):
        """Exact model from |c_k|^2 values, eigenvalues and an eigenvalue->outcome table"""
        return cls(
            StateVector.from_mag2(mag2s, phases),
            Observable(tuple(eigenvalues)),
            PayoffMap.from_dict(payoff),
        )

    @property
    def dim(self) -> int:
        return self.psi.dim

    @property
    def mode(self) -> Mode:
        return self.psi.mode

    @property
    def is_exact(self) -> bool:
        return self.psi.is_exact

    def channel_payoffs(self) -> Tuple[Fraction, ...]:
        """Omega(lambda_k) for every channel k"""
        table = self.payoff.as_dict()
        return tuple(table[lam] for lam in self.observable.eigenvalues)

    def distinct_payoffs(self) -> Tuple[Fraction, ...]:
        return tuple(sorted(set(self.channel_payoffs())))

    def payoff_groups(self) -> Dict[Fraction, Tuple[int, ...]]:
        """lambda^-1(u_j): channels grouped by payoff, ordered by payoff value"""
        groups = {}
        for k, u in enumerate(self.channel_payoffs()):
            groups.setdefault(u, []).append(k)
        return {u: tuple(groups[u]) for u in sorted(groups)}

    def with_psi(self, psi: StateVector) -> "ExperimentalModel":
        return ExperimentalModel(psi, self.observable, self.payoff)

    def with_payoff(self, payoff: PayoffMap) -> "ExperimentalModel":
        return ExperimentalModel(self.psi, self.observable, payoff)

    def scaled(self, factor: Amplitude) -> "ExperimentalModel":
        return self.with_psi(self.psi.scaled(factor))


@dataclass(frozen=True)
class WeightVector:
    """Channel weights w_k with sum 1"""

    w: Tuple

    def __post_init__(self):
        values = tuple(Fraction(x) if not isinstance(x, float) else x for x in self.w)
        if not values:
            raise InvalidWeightsError("empty weight vector")
        exact = all(isinstance(x, Fraction) for x in values)
        if exact:
            if any(x < 0 or x > 1 for x in values) or sum(values) != 1:
                raise InvalidWeightsError(f"weights {values} are not a probability vector")
        else:
            values = tuple(float(x) for x in values)
            tol = settings.WEIGHT_SUM_TOL
            if any(x < -tol or x > 1 + tol for x in values) or abs(sum(values) - 1) > tol:
                raise InvalidWeightsError(f"weights {values} are not a probability vector")
        object.__setattr__(self, "w", values)

    @classmethod
    def uniform(cls, d: int) -> "WeightVector":
        return cls(tuple(Fraction(1, d) for _ in range(d)))

    @classmethod
    def point_mass(cls, d: int, k: int) -> "WeightVector":
        return cls(tuple(Fraction(int(j == k)) for j in range(d)))

    @classmethod
    def born(cls, g: ExperimentalModel) -> "WeightVector":
        """|c_k|^2 / sum_j |c_j|^2"""
        norm2 = g.psi.norm2()
        return cls(tuple(m / norm2 for m in g.psi.mag2s()))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.w)

    def __len__(self) -> int:
        return len(self.w)

    def grouped(self, payoffs: Sequence) -> Dict[Fraction, object]:
        """p_j = sum of w_k over the channels with payoff u_j"""
        if len(payoffs) != len(self.w):
            raise DimensionMismatchError(f"{len(self.w)} weights for {len(payoffs)} channels")
        probs = {}
        for u, w in zip(payoffs, self.w):
            probs[u] = probs.get(u, 0) + w
        return {u: probs[u] for u in sorted(probs)}

    def max_distance(self, other: "WeightVector") -> float:
        return max(abs(float(a) - float(b)) for a, b in zip(self.w, other.w))


@dataclass(frozen=True)
class RealizationReport:
    """Outcome of a realization check; clause names the first failing condition"""

    realized: bool
    stage: int
    clause: Optional[str] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.realized


@dataclass(frozen=True)
class MultipleChannelExperiment:
    """d channels, each deterministic in isolation, recombined before measurement.

    channel_states are the states of the single-channel experiments M_k at
    region r1; stages are the unitary evolutions to regions r2, r3, ...
    """

    channel_states: Tuple[StateVector, ...]
    channel_outcomes: Tuple[Fraction, ...]
    superposition_coeffs: Tuple[Amplitude, ...]
    stages: Tuple[Isometry, ...] = ()

    def __post_init__(self):
        states = tuple(self.channel_states)
        outcomes = tuple(Fraction(u) for u in self.channel_outcomes)
        coeffs = tuple(self.superposition_coeffs)
        d = len(states)
        if d == 0 or len(outcomes) != d or len(coeffs) != d:
            raise DimensionMismatchError(
                f"{d} channel states, {len(outcomes)} outcomes, {len(coeffs)} coefficients"
            )
        if any(u == 0 for u in outcomes):
            raise InvalidModelError("channel outcomes must be nonzero numerals")
        if len({s.dim for s in states}) != 1:
            raise DimensionMismatchError("channel states live in different dimensions")
        for j, a in enumerate(states):
            for k, b in enumerate(states):
                if k < j:
                    continue
                overlap = inner_product(a, b).abs2()
                expected = 1 if j == k else 0
                if abs(overlap - expected) > settings.FLOAT_TOL:
                    raise InvalidModelError(f"channel states {j} and {k} are not orthonormal")
        dim = states[0].dim
        for stage in self.stages:
            if stage.source_dim != dim:
                raise DimensionMismatchError(
                    f"stage {stage.kind.value} expects dimension {stage.source_dim}, got {dim}"
                )
            dim = stage.target_dim
        object.__setattr__(self, "channel_states", states)
        object.__setattr__(self, "channel_outcomes", outcomes)
        object.__setattr__(self, "superposition_coeffs", coeffs)
        object.__setattr__(self, "stages", tuple(self.stages))

    @classmethod
    def from_model(cls, g: ExperimentalModel, stages: Sequence[Isometry] = ()):
        """The experiment whose channel k is phi_k with outcome Omega(lambda_k)"""
        states = tuple(
            StateVector.basis(g.dim, k, g.psi.basis_tag, g.mode) for k in range(g.dim)
        )
        return cls(states, g.channel_payoffs(), g.psi.coeffs, tuple(stages))

    @property
    def d(self) -> int:
        return len(self.channel_states)

    @property
    def D(self) -> int:
        return len(set(self.channel_outcomes))

    def outcome_set(self) -> Tuple[Fraction, ...]:
        return tuple(sorted(set(self.channel_outcomes)))

    def channel_states_at(self, stage: int) -> Tuple[StateVector, ...]:
        if not 0 <= stage <= len(self.stages):
            raise IndexOutOfRangeError(f"stage {stage} outside 0..{len(self.stages)}")
        states = self.channel_states
        for U in self.stages[:stage]:
            states = tuple(apply_isometry(U, s) for s in states)
        return states

    def state_at(self, stage: int) -> StateVector:
        """sum_k c_k phi_k evolved to the given region"""
        states = self.channel_states_at(stage)
        coeffs = tuple(
            exact_sum([c * s.coeffs[j] for c, s in zip(self.superposition_coeffs, states)])
            for j in range(states[0].dim)
        )
        return StateVector(coeffs, states[0].basis_tag)


def _same_vector(a: StateVector, b: StateVector) -> bool:
    if a.is_exact and b.is_exact:
        return a.coeffs == b.coeffs
    return a.is_close(b)


def realizes(M: MultipleChannelExperiment, g: ExperimentalModel, stage: int = 0) -> RealizationReport:
    """Check clauses (i)-(iii) of the realization relation at the given region.

    The model's vector is read in the experiment's basis at that region, so
    basis tags are not compared.
    """
    states = M.channel_states_at(stage)
    dim = states[0].dim
    if g.dim != dim:
        raise DimensionMismatchError(f"model has dimension {g.dim}, experiment region {stage} has {dim}")

    state = M.state_at(stage)
    if not _same_vector(state, g.psi):
        return RealizationReport(False, stage, "i", "model state differs from sum_k c_k phi_k")

    eigenvalues = g.observable.eigenvalues
    channel_eigenvalues = []
    for k, phi in enumerate(states):
        support = {j for j, c in enumerate(phi.coeffs) if not c.is_zero}
        values = {eigenvalues[j] for j in support}
        if len(values) != 1:
            return RealizationReport(
                False, stage, "ii", f"channel state {k} is not an eigenvector of the observable"
            )
        channel_eigenvalues.append(values.pop())

    for k, lam in enumerate(channel_eigenvalues):
        if g.payoff(lam) != M.channel_outcomes[k]:
            return RealizationReport(
                False,
                stage,
                "iii",
                f"Omega({lam}) = {g.payoff(lam)} but channel {k} yields {M.channel_outcomes[k]}",
            )
    return RealizationReport(True, stage)


def born_value(g: ExperimentalModel):
    """<psi, Omega(X) psi> / <psi, psi>"""
    norm2 = g.psi.norm2()
    if norm2 == 0:
        raise ZeroStateError("<psi, psi> = 0")
    numerator = sum(m * u for m, u in zip(g.psi.mag2s(), g.channel_payoffs()))
    if g.is_exact:
        return Fraction(numerator) / norm2
    return float(numerator) / norm2


def weight_value(g: ExperimentalModel, w: WeightVector):
    """sum_k w_k Omega(lambda_k)"""
    if len(w) != g.dim:
        raise DimensionMismatchError(f"{len(w)} weights for a model of dimension {g.dim}")
    value = sum(wk * u for wk, u in zip(w.w, g.channel_payoffs()))
    return value if w.is_exact else float(value)


def outcome_probs(g: ExperimentalModel, w: WeightVector) -> Dict[Fraction, object]:
    if len(w) != g.dim:
        raise DimensionMismatchError(f"{len(w)} weights for a model of dimension {g.dim}")
    return w.grouped(g.channel_payoffs())


def check_frame_additivity(g: ExperimentalModel, resolutions: Iterable[Sequence[Sequence[int]]]) -> bool:
    """Check sum_k f(P_k) = 1 with f(P) = <psi, P psi>/<psi, psi> on each resolution.

    A resolution is a partition of the basis indices 0..d-1; each part stands
    for the projector onto the span of those basis vectors.
    """
    norm2 = g.psi.norm2()
    mag2s = g.psi.mag2s()
    for resolution in resolutions:
        covered = sorted(k for part in resolution for k in part)
        if covered != list(range(g.dim)) or any(len(part) == 0 for part in resolution):
            raise InvalidPartitionError(f"{resolution} is not a resolution of the identity on 0..{g.dim - 1}")
        total = sum(sum(mag2s[k] for k in part) / norm2 for part in resolution)
        if g.is_exact:
            if total != 1:
                return False
        elif abs(total - 1) > settings.FLOAT_TOL * g.dim:
            return False
    return True


def random_model(
    rng: np.random.Generator,
    max_dim: int = 6,
    max_denominator: int = 12,
    max_numerator: int = 12,
    payoff_values: Sequence[int] = (-3, -2, -1, 1, 2, 3),
    allow_zero: bool = False,
) -> ExperimentalModel:
    """A random exact model with rational |c_k|^2 and rational phases"""
    d = int(rng.integers(1, max_dim + 1))
    low = 0 if allow_zero else 1
    mag2s = [
        Fraction(int(rng.integers(low, max_numerator + 1)), int(rng.integers(1, max_denominator + 1)))
        for _ in range(d)
    ]
    if all(m == 0 for m in mag2s):
        mag2s[0] = Fraction(1)
    phases = [Fraction(int(rng.integers(0, 12)), 12) for _ in range(d)]
    eigenvalues = [Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(d)]
    payoff = {lam: Fraction(int(rng.choice(payoff_values))) for lam in set(eigenvalues)}
    return ExperimentalModel.build(mag2s, eigenvalues, payoff, phases)
