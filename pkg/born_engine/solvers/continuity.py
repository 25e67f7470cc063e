import math
from fractions import Fraction

from born_engine import settings
from born_engine.core import StateVector
from born_engine.errors import NoConvergenceError
from born_engine.model import ExperimentalModel, WeightVector
from born_engine.solvers.base import BaseSolver, DerivationReport
from born_engine.solvers.rational import RationalSolver


def _truncate(value, i: int) -> Fraction:
    scale = 10**i
    return Fraction(math.floor(Fraction(value) * scale), scale)


class ContinuitySolver(BaseSolver):
    """
    Solver for arbitrary |c_k|^2, assuming V is continuous in the norm.

    Iterate i rescales the |c_k|^2 so the largest is 1, then truncates every
    |c_k|^2 (and every phase) to denominator 10**i. Rescaling leaves the Born
    weights unchanged.
    Entries that truncate to zero are replaced by 10**-i so every approximant
    stays positive; exactly zero channels then converge to weight 0. Each
    approximant goes through the rational solver without the refined
    dimension limit. The sequence stops once successive iterates differ by
    less than tol in max norm and the truncation step 10**-i is below tol.
    """

    name = "Continuity"

    def __init__(
        self,
        tol: float = settings.DEFAULT_TOL,
        max_iterates: int = settings.CONTINUITY_MAX_ITERATES,
    ):
        if not tol > 0:
            raise NoConvergenceError(f"tolerance must be positive, got {tol}")
        self.tol = tol
        self.max_iterates = max_iterates
        self.rational = RationalSolver()

    def approximant(self, g: ExperimentalModel, i: int) -> ExperimentalModel:
        floor = Fraction(1, 10**i)
        top = max(g.psi.mag2s())
        mag2s = [_truncate(m / top, i) for m in g.psi.mag2s()]
        mag2s = [m if m > 0 else floor for m in mag2s]
        phases = [_truncate(p, i) for p in g.psi.phases()]
        return g.with_psi(StateVector.from_mag2(mag2s, phases, g.psi.basis_tag))

    def solve(self, g: ExperimentalModel) -> DerivationReport:
        if g.is_exact and all(m > 0 for m in g.psi.mag2s()):
            # constant sequence
            z = self.rational.refinement_multiplicities(g)
            report = self.rational.solve_refined(g, z, enforce_limit=False)
            return report.renamed(self.name, iterations=1)

        previous = None
        for i in range(1, self.max_iterates + 1):
            g_i = self.approximant(g, i)
            z = self.rational.refinement_multiplicities(g_i)
            report = self.rational.solve_refined(g_i, z, enforce_limit=False)
            current = self._as_floats(report)
            if previous is not None:
                step = max(abs(a - b) for a, b in zip(current, previous))
                self.logger.debug(f"Iterate {i}: step {step:.3e}")
                if step < self.tol and 10.0**-i < self.tol:
                    self.logger.info(f"Converged after {i} iterates")
                    return self._float_report(report, i)
            previous = current
        raise NoConvergenceError(
            f"no convergence to tol={self.tol} within {self.max_iterates} iterates"
        )

    @staticmethod
    def _as_floats(report: DerivationReport):
        if report.weights is not None:
            return [float(w) for w in report.weights.w]
        return [float(p) for p in report.outcome_probs.values()]

    def _float_report(self, report: DerivationReport, iterations: int) -> DerivationReport:
        weights = None
        if report.weights is not None:
            weights = WeightVector(tuple(float(w) for w in report.weights.w))
        probs = {u: float(p) for u, p in report.outcome_probs.items()}
        return report.renamed(
            self.name, weights=weights, outcome_probs=probs, iterations=iterations, refined_dim=None
        )
