# Derivation methods, one solver class per method.
#
# derive(g, method) picks a solver by name; "auto" chooses the equal-norm
# solver when every |c_k|^2 is equal, the rational solver when the model is
# exact with positive |c_k|^2, and the continuity solver otherwise.

from born_engine import settings
from born_engine.equivalence import has_equal_norms
from born_engine.linalg import LinearSystem, RankReport, uniqueness_analysis
from born_engine.model import ExperimentalModel, WeightVector
from born_engine.solvers.base import BaseSolver, DerivationReport
from born_engine.solvers.continuity import ContinuitySolver
from born_engine.solvers.equal_norm import EqualNormSolver
from born_engine.solvers.lp import (
    LpSolver,
    ParallelogramWitness,
    RotationWitness,
    lp_rotation_witness,
    lp_weights,
    parallelogram_witness,
)
from born_engine.solvers.rational import RationalSolver

METHODS = ("auto", "equal", "rational", "continuity")


def choose_method(g: ExperimentalModel) -> str:
    if has_equal_norms(g):
        return "equal"
    if g.is_exact and all(m > 0 for m in g.psi.mag2s()):
        return "rational"
    return "continuity"


def get_solver(method: str, tol: float = settings.DEFAULT_TOL) -> BaseSolver:
    if method == "equal":
        return EqualNormSolver()
    if method == "rational":
        return RationalSolver()
    if method == "continuity":
        return ContinuitySolver(tol)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def derive(g: ExperimentalModel, method: str = "auto", tol: float = settings.DEFAULT_TOL) -> DerivationReport:
    if method == "auto":
        method = choose_method(g)
    return get_solver(method, tol).solve(g)


def solve_equal_norm(g: ExperimentalModel) -> DerivationReport:
    return EqualNormSolver().solve(g)


def solve_rational(g: ExperimentalModel) -> DerivationReport:
    return RationalSolver().solve(g)


def solve_continuity(g: ExperimentalModel, tol: float = settings.DEFAULT_TOL) -> DerivationReport:
    return ContinuitySolver(tol).solve(g)


__all__ = [
    "BaseSolver",
    "ContinuitySolver",
    "DerivationReport",
    "EqualNormSolver",
    "LinearSystem",
    "LpSolver",
    "METHODS",
    "ParallelogramWitness",
    "RankReport",
    "RationalSolver",
    "RotationWitness",
    "WeightVector",
    "choose_method",
    "derive",
    "get_solver",
    "lp_rotation_witness",
    "lp_weights",
    "parallelogram_witness",
    "solve_continuity",
    "solve_equal_norm",
    "solve_rational",
    "uniqueness_analysis",
]
