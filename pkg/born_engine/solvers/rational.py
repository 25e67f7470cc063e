import math
from fractions import Fraction
from typing import Sequence, Tuple

from born_engine import settings
from born_engine.equivalence import (
    Refine,
    equal_norm_permutation_constraints,
    payoff_group_constraints,
    transform,
)
from born_engine.errors import (
    NotEqualNormError,
    NotRationalError,
    RefinementTooLargeError,
    ZeroAmplitudeError,
)
from born_engine.linalg import LinearEquation, LinearSystem
from born_engine.model import ExperimentalModel
from born_engine.solvers.base import BaseSolver, DerivationReport, summarize, transposition_count


class RationalSolver(BaseSolver):
    """
    Solver for models with rational |c_k|^2.

    Channel k is refined into z_k = |c_k|^2 * L sub-channels (L clears the
    denominators, z reduced to a primitive vector), which gives an equal-norm
    model of dimension s = sum z_k. Its transposition constraints are solved
    and pulled back through the refinement edge.

    Up to materialize_limit sub-channels the refined model is built
    explicitly. Above that the refined system is solved on its block quotient:
    the constraints are invariant under permutations inside a block, so the
    solution is constant on blocks and one unknown per block suffices.
    """

    name = "Rational"

    def __init__(
        self,
        max_refined_dim: int = settings.MAX_REFINED_DIM,
        materialize_limit: int = settings.MATERIALIZE_LIMIT,
    ):
        self.max_refined_dim = max_refined_dim
        self.materialize_limit = materialize_limit

    @staticmethod
    def refinement_multiplicities(g: ExperimentalModel) -> Tuple[int, ...]:
        if not g.is_exact:
            raise NotRationalError("model amplitudes are floats; use the continuity solver")
        mag2s = g.psi.mag2s()
        zeros = [k + 1 for k, m in enumerate(mag2s) if m == 0]
        if zeros:
            raise ZeroAmplitudeError(f"|c_k|^2 = 0 for channels {zeros}")
        lcm = 1
        for m in mag2s:
            lcm = lcm * m.denominator // math.gcd(lcm, m.denominator)
        z = [int(m * lcm) for m in mag2s]
        content = 0
        for x in z:
            content = math.gcd(content, x)
        return tuple(x // content for x in z)

    def solve(self, g: ExperimentalModel) -> DerivationReport:
        return self.solve_refined(g, self.refinement_multiplicities(g))

    def solve_refined(
        self, g: ExperimentalModel, z: Sequence[int], enforce_limit: bool = True
    ) -> DerivationReport:
        """Derive the weights of g through the refinement z (z_k proportional to |c_k|^2)"""
        z = tuple(int(x) for x in z)
        mag2s = g.psi.mag2s()
        if len(z) != g.dim or len({Fraction(m) / x for m, x in zip(mag2s, z)}) != 1:
            raise NotEqualNormError(f"refinement {z} does not equalize |c_k|^2 = {[str(m) for m in mag2s]}")
        s = sum(z)
        if enforce_limit and s > self.max_refined_dim:
            raise RefinementTooLargeError(
                f"refined dimension {s} exceeds {self.max_refined_dim}; use the continuity solver"
            )
        self.logger.info(f"Refined dimension s={s}")
        if s <= self.materialize_limit:
            return self._solve_materialized(g, z)
        return self._solve_quotient(g, z)

    def _solve_materialized(self, g: ExperimentalModel, z) -> DerivationReport:
        edge = transform(g, Refine(z))
        refined = edge.target
        raw = LinearSystem.over_weights(refined.dim, equal_norm_permutation_constraints(refined))
        group = LinearSystem.over_weights(
            g.dim,
            [edge.pull_back_equation(eq) for eq in payoff_group_constraints(refined.channel_payoffs())],
        )

        def lift(values):
            return tuple(sum(values[j] for j in block) for block in edge.weight_pushforward)

        return summarize(self.name, g.channel_payoffs(), raw, group, lift, refined_dim=refined.dim)

    def _solve_quotient(self, g: ExperimentalModel, z) -> DerivationReport:
        payoffs = g.channel_payoffs()
        d = g.dim
        equations = [
            LinearEquation.equality(d, j, k, f"u{j + 1} = u{k + 1}", ("transposition-block", j, k))
            for j in range(d)
            for k in range(j + 1, d)
            if payoffs[j] != payoffs[k]
        ]
        equations.append(LinearEquation.normalization(d, z, "sum z_k u_k = 1"))
        raw = LinearSystem(tuple(f"u{k + 1}" for k in range(d)), equations)
        group = LinearSystem.over_weights(d, payoff_group_constraints(payoffs, z))

        sizes = {}
        for u, x in zip(payoffs, z):
            sizes[u] = sizes.get(u, 0) + x

        def lift(values):
            return tuple(x * u for x, u in zip(z, values))

        return summarize(
            self.name,
            payoffs,
            raw,
            group,
            lift,
            constraints_used=transposition_count(list(sizes.values())) + 1,
            refined_dim=sum(z),
        )
