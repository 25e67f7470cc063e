"""
The refinement argument carried out in l^p instead of l^2.

For p != 2 the weights |c_k|^p / sum_j |c_j|^p define a rule, but l^p is not
an inner-product space: the witnesses below exhibit an l^2-preserving rotation
that changes sum |c_k|^p and a pair of vectors violating the parallelogram law.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from born_engine.core import parallelogram_defect
from born_engine.errors import InvalidPError
from born_engine.model import ExperimentalModel, WeightVector
from born_engine.solvers.base import BaseSolver, DerivationReport


def _check_p(p) -> float:
    p = float(p)
    if not (p >= 1 and math.isfinite(p)):
        raise InvalidPError(f"p must be a finite number >= 1, got {p}")
    return p


def lp_weights(g: ExperimentalModel, p) -> WeightVector:
    """w_k = |c_k|^p / sum_j |c_j|^p, exact when g is exact and p/2 is an integer"""
    p = _check_p(p)
    half = p / 2
    if g.is_exact and half.is_integer():
        powers = [m ** int(half) for m in g.psi.mag2s()]
        total = sum(powers, Fraction(0))
        return WeightVector(tuple(x / total for x in powers))
    magnitudes = np.abs(g.psi.to_numpy())
    powers = magnitudes**p
    return WeightVector(tuple(float(x) for x in powers / powers.sum()))


class LpSolver(BaseSolver):
    """Weights from the l^p norm; p = 2 is the Born rule"""

    def __init__(self, p=2):
        self.p = _check_p(p)
        self.name = f"Lp({self.p:g})"

    def solve(self, g: ExperimentalModel) -> DerivationReport:
        weights = lp_weights(g, self.p)
        self.logger.debug(f"p={self.p:g}: weights {weights.w}")
        return DerivationReport(
            method=self.name,
            weights=weights,
            outcome_probs=weights.grouped(g.channel_payoffs()),
            unique=True,
            gauge_dim=0,
        )


@dataclass(frozen=True)
class RotationWitness:
    p: float
    before: Tuple[complex, ...]
    after: Tuple[complex, ...]
    lp_sum_before: float
    lp_sum_after: float
    l2_sum_before: float
    l2_sum_after: float

    @property
    def lp_change(self) -> float:
        return abs(self.lp_sum_after - self.lp_sum_before)

    @property
    def l2_change(self) -> float:
        return abs(self.l2_sum_after - self.l2_sum_before)


@dataclass(frozen=True)
class ParallelogramWitness:
    p: float
    x: Tuple[complex, ...]
    y: Tuple[complex, ...]
    defect: float


def _power_sum(values, p: float) -> float:
    return float(np.sum(np.abs(values) ** p))


def lp_rotation_witness(p, turns: float = 0.125) -> RotationWitness:
    """Rotate (1, 0) by the given angle (in turns) in the plane and compare power sums"""
    p = _check_p(p)
    angle = 2 * math.pi * turns
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    before = np.array([1.0, 0.0], dtype=complex)
    after = rotation @ before
    return RotationWitness(
        p=p,
        before=tuple(complex(x) for x in before),
        after=tuple(complex(x) for x in after),
        lp_sum_before=_power_sum(before, p),
        lp_sum_after=_power_sum(after, p),
        l2_sum_before=_power_sum(before, 2),
        l2_sum_after=_power_sum(after, 2),
    )


def parallelogram_witness(p) -> ParallelogramWitness:
    """x = (1, 0), y = (0, 1): the defect is 2 * 2**(2/p) - 4, zero only for p = 2"""
    p = _check_p(p)
    x = np.array([1.0, 0.0], dtype=complex)
    y = np.array([0.0, 1.0], dtype=complex)
    return ParallelogramWitness(
        p=p,
        x=tuple(complex(v) for v in x),
        y=tuple(complex(v) for v in y),
        defect=parallelogram_defect(x, y, p),
    )
