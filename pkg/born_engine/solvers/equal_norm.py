from born_engine.equivalence import equal_norm_permutation_constraints, payoff_group_constraints
from born_engine.linalg import LinearSystem
from born_engine.model import ExperimentalModel
from born_engine.solvers.base import BaseSolver, DerivationReport, summarize


class EqualNormSolver(BaseSolver):
    """
    Solver for models whose coefficients all have the same magnitude.
    Every transposition of two channels with different payoffs is a
    consistency edge, which forces their weights to agree.
    """

    name = "EqualNorm"

    def solve(self, g: ExperimentalModel) -> DerivationReport:
        raw = LinearSystem.over_weights(g.dim, equal_norm_permutation_constraints(g))
        payoffs = g.channel_payoffs()
        group = LinearSystem.over_weights(g.dim, payoff_group_constraints(payoffs))
        report = summarize(self.name, payoffs, raw, group)
        self.logger.info(
            f"d={g.dim}: {report.constraints_used} constraints, gauge dimension {report.gauge_dim}"
        )
        return report
