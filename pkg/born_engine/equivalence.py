"""
The five model transformations of the consistency argument and the
constraint edges they generate.

Every transformation maps a model g to a model g' realized by the same
multiple-channel experiment, so any consistent expectation algorithm must give
V(g) = V(g'). Edges remember where each source channel's weight lands in the
target so that constraints can be moved between the two sides.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from born_engine import settings
from born_engine.core import Isometry, Observable, apply_isometry
from born_engine.errors import (
    DimensionMismatchError,
    IncompatibleTransformationError,
    NotEqualNormError,
)
from born_engine.linalg import LinearEquation
from born_engine.model import (
    ExperimentalModel,
    MultipleChannelExperiment,
    PayoffMap,
    RealizationReport,
    WeightVector,
    realizes,
)

logger = logging.getLogger(__name__)


class Transformation:
    """Base class; subclasses implement apply() and pushforward()"""

    kind = "transformation"

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        raise NotImplementedError

    def pushforward(self, g: ExperimentalModel) -> Tuple[Tuple[int, ...], ...]:
        """Target channels receiving each source channel (identity by default)"""
        return tuple((k,) for k in range(g.dim))

    def isometry(self, g: ExperimentalModel):
        """The unitary evolution connecting the two models, or None"""
        return None

    def inverse(self) -> "Transformation":
        raise IncompatibleTransformationError(f"{self.kind} has no inverse on models")

    def _check_dim(self, g: ExperimentalModel, n: int):
        if g.dim != n:
            raise IncompatibleTransformationError(
                f"{self.kind} acts on dimension {n}, model has dimension {g.dim}"
            )


@dataclass(frozen=True)
class Relabel(Transformation):
    """<psi, X, Omega> -> <psi, f(X), Omega o f^-1>, f given by its graph"""

    mapping: Tuple[Tuple[Fraction, Fraction], ...]
    kind = "relabel"

    def __post_init__(self):
        items = self.mapping.items() if isinstance(self.mapping, dict) else self.mapping
        graph = {}
        for x, y in items:
            x, y = Fraction(x), Fraction(y)
            if x in graph and graph[x] != y:
                raise IncompatibleTransformationError(f"f assigns two values to {x}")
            graph[x] = y
        object.__setattr__(self, "mapping", tuple(sorted(graph.items())))

    @classmethod
    def negation(cls, spectrum) -> "Relabel":
        """f = -I"""
        return cls(tuple((lam, -Fraction(lam)) for lam in spectrum))

    @classmethod
    def shift(cls, k, spectrum) -> "Relabel":
        """f_k(x) = x + k"""
        return cls(tuple((lam, Fraction(lam) + Fraction(k)) for lam in spectrum))

    @classmethod
    def swap(cls, a, b, spectrum) -> "Relabel":
        """Exchange a and b, identity elsewhere"""
        a, b = Fraction(a), Fraction(b)
        table = {Fraction(lam): Fraction(lam) for lam in spectrum}
        table[a], table[b] = b, a
        return cls(tuple(table.items()))

    def __call__(self, x) -> Fraction:
        return dict(self.mapping)[Fraction(x)]

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        graph = dict(self.mapping)
        spectrum = g.observable.spectrum()
        missing = [lam for lam in spectrum if lam not in graph]
        if missing:
            raise IncompatibleTransformationError(f"f is undefined on eigenvalues {missing}")
        images = [graph[lam] for lam in spectrum]
        if len(set(images)) != len(images):
            raise IncompatibleTransformationError("f is not injective on the spectrum")
        observable = Observable(
            tuple(graph[lam] for lam in g.observable.eigenvalues), g.observable.blocks
        )
        payoff = PayoffMap(tuple((graph[lam], g.payoff(lam)) for lam in spectrum))
        return ExperimentalModel(g.psi, observable, payoff)

    def inverse(self) -> "Relabel":
        images = [y for _, y in self.mapping]
        if len(set(images)) != len(images):
            raise IncompatibleTransformationError("f is not invertible")
        return Relabel(tuple((y, x) for x, y in self.mapping))


@dataclass(frozen=True)
class Coarsen(Transformation):
    """Replace rank-1 projectors by the spectral projectors of repeated eigenvalues"""

    kind = "coarsen"

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        return ExperimentalModel(g.psi, g.observable.coarsened(), g.payoff)


@dataclass(frozen=True)
class Phase(Transformation):
    """psi -> U_theta psi with theta in turns"""

    theta: Tuple
    kind = "phase"

    def __post_init__(self):
        object.__setattr__(
            self, "theta", tuple(t if isinstance(t, float) else Fraction(t) for t in self.theta)
        )

    def isometry(self, g: ExperimentalModel) -> Isometry:
        return Isometry.phase_rotation(self.theta)

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        self._check_dim(g, len(self.theta))
        return g.with_psi(apply_isometry(self.isometry(g), g.psi))

    def inverse(self) -> "Phase":
        return Phase(tuple(-t for t in self.theta))


@dataclass(frozen=True)
class Permute(Transformation):
    """Channel k moves to slot pi[k]; the observable moves with it (0-based)"""

    pi: Tuple[int, ...]
    kind = "permute"

    def __post_init__(self):
        pi = tuple(int(j) for j in self.pi)
        if sorted(pi) != list(range(len(pi))):
            raise IncompatibleTransformationError(f"{pi} is not a bijection on 0..{len(pi) - 1}")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def transposition(cls, d: int, j: int, k: int) -> "Permute":
        pi = list(range(d))
        pi[j], pi[k] = k, j
        return cls(tuple(pi))

    def isometry(self, g: ExperimentalModel) -> Isometry:
        return Isometry.permutation(self.pi)

    def pushforward(self, g: ExperimentalModel):
        return tuple((j,) for j in self.pi)

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        self._check_dim(g, len(self.pi))
        eigenvalues = [None] * g.dim
        for k, lam in enumerate(g.observable.eigenvalues):
            eigenvalues[self.pi[k]] = lam
        blocks = tuple(tuple(self.pi[k] for k in block) for block in g.observable.blocks)
        return ExperimentalModel(
            apply_isometry(self.isometry(g), g.psi), Observable(tuple(eigenvalues), blocks), g.payoff
        )

    def inverse(self) -> "Permute":
        inv = [0] * len(self.pi)
        for k, j in enumerate(self.pi):
            inv[j] = k
        return Permute(tuple(inv))


@dataclass(frozen=True)
class Refine(Transformation):
    """Split channel k into z[k] equal-amplitude sub-channels (consecutive blocks)"""

    z: Tuple[int, ...]
    kind = "refine"

    def __post_init__(self):
        z = tuple(int(x) for x in self.z)
        if not z or any(x < 1 for x in z):
            raise IncompatibleTransformationError(f"refinement sizes must be >= 1, got {z}")
        object.__setattr__(self, "z", z)

    @property
    def s(self) -> int:
        return sum(self.z)

    def isometry(self, g: ExperimentalModel) -> Isometry:
        return Isometry.refinement(self.z)

    def pushforward(self, g: ExperimentalModel):
        return self.isometry(g).blocks()

    def apply(self, g: ExperimentalModel) -> ExperimentalModel:
        self._check_dim(g, len(self.z))
        sub_blocks = self.pushforward(g)
        eigenvalues = tuple(lam for lam, z in zip(g.observable.eigenvalues, self.z) for _ in range(z))
        blocks = tuple(
            tuple(j for k in block for j in sub_blocks[k]) for block in g.observable.blocks
        )
        return ExperimentalModel(
            apply_isometry(self.isometry(g), g.psi), Observable(eigenvalues, blocks), g.payoff
        )


@dataclass(frozen=True)
class ConstraintEdge:
    """g' = via(g); weight_pushforward[k] lists the target channels fed by source channel k"""

    source: ExperimentalModel
    target: ExperimentalModel
    via: Transformation
    weight_pushforward: Tuple[Tuple[int, ...], ...]

    @property
    def is_identity(self) -> bool:
        return self.source == self.target

    def pull_back_weights(self, w: WeightVector) -> WeightVector:
        """Source weights from target weights (block sums)"""
        if len(w) != self.target.dim:
            raise DimensionMismatchError(f"{len(w)} weights for a target of dimension {self.target.dim}")
        return WeightVector(tuple(sum((w.w[j] for j in block), 0 * w.w[0]) for block in self.weight_pushforward))

    def push_forward_weights(self, w: WeightVector) -> WeightVector:
        """Target weights from source weights, split evenly inside each block"""
        if len(w) != self.source.dim:
            raise DimensionMismatchError(f"{len(w)} weights for a source of dimension {self.source.dim}")
        values = [None] * self.target.dim
        for wk, block in zip(w.w, self.weight_pushforward):
            share = wk / len(block)
            for j in block:
                values[j] = share
        return WeightVector(tuple(values))

    def pull_back_equation(self, eq: LinearEquation) -> LinearEquation:
        """Rewrite an equation over target weights in the source weights.

        Target weights inside a block are the even split of the source weight,
        so the coefficient of w_k is the mean of the block's coefficients.
        """
        if len(eq.coeffs) != self.target.dim:
            raise DimensionMismatchError(
                f"equation has {len(eq.coeffs)} coefficients, target has dimension {self.target.dim}"
            )
        coeffs = tuple(
            sum((eq.coeffs[j] for j in block), Fraction(0)) / len(block)
            for block in self.weight_pushforward
        )
        return LinearEquation(coeffs, eq.rhs, eq.tag, eq.provenance + (self.via.kind,))

    def witness_experiment(self) -> MultipleChannelExperiment:
        """An experiment realizing the source at region 0 and the target at its last region"""
        U = self.via.isometry(self.source)
        stages = (U,) if U is not None else ()
        return MultipleChannelExperiment.from_model(self.source, stages)

    def verify(self) -> Tuple[RealizationReport, RealizationReport]:
        M = self.witness_experiment()
        return realizes(M, self.source, 0), realizes(M, self.target, len(M.stages))


def transform(g: ExperimentalModel, t: Transformation) -> ConstraintEdge:
    try:
        target = t.apply(g)
    except DimensionMismatchError as exc:
        raise IncompatibleTransformationError(str(exc)) from exc
    return ConstraintEdge(g, target, t, t.pushforward(g))


def has_equal_norms(g: ExperimentalModel) -> bool:
    mag2s = g.psi.mag2s()
    if g.is_exact:
        return len(set(mag2s)) == 1 and mag2s[0] > 0
    top = max(mag2s)
    return mag2s[0] > 0 and all(abs(m - mag2s[0]) <= settings.FLOAT_TOL * top for m in mag2s)


def require_equal_norms(g: ExperimentalModel):
    if not has_equal_norms(g):
        raise NotEqualNormError(f"|c_k|^2 = {[str(m) for m in g.psi.mag2s()]} are not equal and nonzero")


def equal_norm_permutation_constraints(g: ExperimentalModel) -> List[LinearEquation]:
    """w_j = w_k for every transposition (j k) with distinct payoffs, plus sum w = 1"""
    require_equal_norms(g)
    payoffs = g.channel_payoffs()
    d = g.dim
    equations = [
        LinearEquation.equality(d, j, k, f"w{j + 1} = w{k + 1}", ("transposition", j, k))
        for j in range(d)
        for k in range(j + 1, d)
        if payoffs[j] != payoffs[k]
    ]
    equations.append(LinearEquation.normalization(d))
    return equations


def payoff_group_constraints(payoffs: Sequence, multiplicities: Sequence[int] = None) -> List[LinearEquation]:
    """Gauge-invariant form of the transposition constraints.

    Summing w_j = w_k over every pair between payoff groups a and b of an
    equal-norm model gives |b| * sum_a w - |a| * sum_b w = 0. With
    multiplicities m_k (channel k stands for m_k equal-norm sub-channels) the
    group sizes become sums of m_k. One equation per adjacent pair of groups,
    plus normalization.
    """
    n = len(payoffs)
    multiplicities = list(multiplicities) if multiplicities is not None else [1] * n
    if len(multiplicities) != n:
        raise DimensionMismatchError(f"{len(multiplicities)} multiplicities for {n} channels")
    groups = {}
    for k, u in enumerate(payoffs):
        groups.setdefault(Fraction(u), []).append(k)
    ordered = [groups[u] for u in sorted(groups)]
    sizes = [sum(multiplicities[k] for k in group) for group in ordered]
    equations = []
    for i in range(len(ordered) - 1):
        a, b = ordered[i], ordered[i + 1]
        coeffs = [Fraction(0)] * n
        for k in a:
            coeffs[k] += sizes[i + 1]
        for k in b:
            coeffs[k] -= sizes[i]
        equations.append(
            LinearEquation(tuple(coeffs), Fraction(0), f"groups {i + 1}~{i + 2}", ("payoff-groups", i, i + 1))
        )
    equations.append(LinearEquation.normalization(n))
    return equations


def phase_compensation(g: ExperimentalModel, target_phases: Sequence) -> ConstraintEdge:
    """Rotate each coefficient's phase to the target phase; magnitudes untouched"""
    if len(target_phases) != g.dim:
        raise IncompatibleTransformationError(f"{len(target_phases)} target phases for dimension {g.dim}")
    exact = g.is_exact and not any(isinstance(t, float) for t in target_phases)
    theta = []
    for c, target in zip(g.psi.coeffs, target_phases):
        if exact:
            theta.append(Fraction(0) if c.is_zero else (Fraction(target) - c.phase) % 1)
        else:
            theta.append(0.0 if c.is_zero else (float(target) - c.phase_turns()) % 1.0)
    return transform(g, Phase(tuple(theta)))


def transposition_chain(g: ExperimentalModel, j: int, k: int) -> List[ConstraintEdge]:
    """Permute (j k), relabel to restore the eigenvalues, then compensate the phases.

    For equal norms the last target is <psi, X', Omega'> whose channel payoffs
    are those of g with channels j and k exchanged.
    """
    require_equal_norms(g)
    lam_j, lam_k = g.observable.eigenvalues[j], g.observable.eigenvalues[k]
    if lam_j == lam_k:
        raise IncompatibleTransformationError(f"channels {j} and {k} share eigenvalue {lam_j}")
    permuted = transform(g, Permute.transposition(g.dim, j, k))
    relabeled = transform(permuted.target, Relabel.swap(lam_j, lam_k, g.observable.spectrum()))
    compensated = phase_compensation(relabeled.target, g.psi.phases())
    return [permuted, relabeled, compensated]


def stern_gerlach_chain(g: ExperimentalModel) -> List[ConstraintEdge]:
    """<psi, X, Omega> -> <psi, X, Omega o -I> for d = 2, equal norms, lambda_2 = -lambda_1"""
    if g.dim != 2:
        raise IncompatibleTransformationError(f"the two-channel chain needs d = 2, got {g.dim}")
    require_equal_norms(g)
    lam1, lam2 = g.observable.eigenvalues
    if lam1 != -lam2 or lam1 == 0:
        raise IncompatibleTransformationError(f"spectrum ({lam1}, {lam2}) is not symmetric")
    permuted = transform(g, Permute((1, 0)))
    negated = transform(permuted.target, Relabel.negation(g.observable.spectrum()))
    compensated = phase_compensation(negated.target, g.psi.phases())
    logger.debug(f"Two-channel chain ends at payoff {compensated.target.payoff.entries}")
    return [permuted, negated, compensated]
