import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from born_engine.core import Amplitude, StateVector
from born_engine.errors import (
    InvalidPError,
    NoConvergenceError,
    NotEqualNormError,
    NotRationalError,
    RefinementTooLargeError,
    ZeroAmplitudeError,
)
from born_engine.model import ExperimentalModel, WeightVector, outcome_probs, random_model
from born_engine.solvers import (
    ContinuitySolver,
    LpSolver,
    RationalSolver,
    choose_method,
    derive,
    get_solver,
    lp_rotation_witness,
    lp_weights,
    parallelogram_witness,
    solve_continuity,
    solve_equal_norm,
    solve_rational,
)
from born_engine.solvers.base import transposition_count
from tests.strategies import exact_models, small_mag2

HALF = Fraction(1, 2)


def spin_model(m, n) -> ExperimentalModel:
    return ExperimentalModel.build([m, n], [1, -1], {1: 1, -1: -1})


def test_equal_norm_two_channels(equal_norm_d2):
    report = solve_equal_norm(equal_norm_d2)
    assert report.method == "EqualNorm"
    assert report.weights == WeightVector((HALF, HALF))
    assert report.unique
    assert report.gauge_dim == 0
    assert report.constraints_used == 2
    assert report.expectation() == 0


def test_equal_norm_distinct_payoffs_give_uniform_weights():
    g = ExperimentalModel.build([3] * 4, [1, 2, 3, 4], {1: 1, 2: 2, 3: 3, 4: 4})
    report = solve_equal_norm(g)
    assert report.weights == WeightVector.uniform(4)
    assert report.constraints_used == 7


def test_equal_norm_repeated_payoffs(repeated_payoff_d3):
    report = solve_equal_norm(repeated_payoff_d3)
    assert report.outcome_probs == {5: Fraction(2, 3), 7: Fraction(1, 3)}
    assert not report.unique
    assert report.gauge_dim == 1
    assert "w1 + w2 = 2/3" in report.gauge_note
    assert "fixed by the raw transposition edges" in report.gauge_note
    assert report.weights == WeightVector.uniform(3)


def test_single_payoff_fixes_only_the_total():
    g = ExperimentalModel.build([1, 1, 1], [1, 2, 3], {1: 4, 2: 4, 3: 4})
    report = solve_equal_norm(g)
    assert report.outcome_probs == {4: 1}
    assert report.gauge_dim == 2
    assert report.weights is None
    assert report.expectation() == 4


def test_single_channel():
    report = derive(ExperimentalModel.build([5], [2], {2: 3}))
    assert report.weights == WeightVector((1,))
    assert report.unique


def test_equal_norm_solver_rejects_unequal_norms():
    with pytest.raises(NotEqualNormError):
        solve_equal_norm(spin_model(1, 2))


def test_rational_two_channel_grid():
    for m in range(1, 13):
        for n in range(1, 13):
            report = solve_rational(spin_model(m, n))
            assert report.weights == WeightVector((Fraction(m, m + n), Fraction(n, m + n))), (m, n)
            assert report.refined_dim == (m + n) // math.gcd(m, n)


def test_rational_three_channels(rational_1_2_3):
    report = solve_rational(rational_1_2_3)
    assert report.weights == WeightVector((Fraction(1, 6), Fraction(1, 3), HALF))
    assert report.refined_dim == 6
    assert report.unique


def test_unnormalized_state():
    g = ExperimentalModel.build([2, 4], [1, -1], {1: 1, -1: -1}, phases=[Fraction(1, 3), 0])
    assert solve_rational(g).weights == WeightVector((Fraction(1, 3), Fraction(2, 3)))


def test_random_models_match_born_outcome_probabilities():
    rng = np.random.default_rng(5)
    for _ in range(200):
        g = random_model(rng)
        report = RationalSolver(max_refined_dim=10**9).solve(g)
        assert report.outcome_probs == outcome_probs(g, WeightVector.born(g))
        assert report.gauge_dim == g.dim - len(g.distinct_payoffs())
        assert report.unique == (report.gauge_dim == 0)
        if report.weights is not None and report.unique:
            assert report.weights == WeightVector.born(g)


def test_scaling_leaves_the_derivation_unchanged():
    rng = np.random.default_rng(9)
    for _ in range(50):
        g = random_model(rng, max_denominator=6)
        factor = Amplitude.exact(Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 10))), Fraction(int(rng.integers(0, 8)), 8))
        assert derive(g.scaled(factor)) == derive(g)


@given(exact_models(max_dim=4, mag2=small_mag2))
@settings(max_examples=50, deadline=None)
def test_quotient_path_matches_materialized_refinement(g):
    """Property: solving on block means gives the same report as the explicit refinement"""
    assert RationalSolver(materialize_limit=0).solve(g) == RationalSolver(materialize_limit=64).solve(g)


def test_finer_refinements_agree(rational_1_2_3):
    solver = RationalSolver()
    base = solver.solve(rational_1_2_3)
    for t in (2, 3, 4):
        assert solver.solve_refined(rational_1_2_3, (t, 2 * t, 3 * t)).weights == base.weights
    with pytest.raises(NotEqualNormError):
        solver.solve_refined(rational_1_2_3, (1, 1, 1))


def test_constraint_count_matches_refined_transpositions(rational_1_2_3):
    assert solve_rational(rational_1_2_3).constraints_used == transposition_count([1, 2, 3]) + 1
    assert transposition_count([1, 2, 3]) == 11


def test_rational_solver_errors():
    with pytest.raises(ZeroAmplitudeError):
        solve_rational(spin_model(1, 0))
    with pytest.raises(NotRationalError):
        solve_rational(ExperimentalModel(
            spin_model(1, 1).psi.to_float(), spin_model(1, 1).observable, spin_model(1, 1).payoff
        ))
    with pytest.raises(RefinementTooLargeError):
        solve_rational(spin_model(1, 10**6))
    with pytest.raises(RefinementTooLargeError):
        RationalSolver(max_refined_dim=10).solve(spin_model(1, 10))


def irrational_split() -> ExperimentalModel:
    p = 1 / math.sqrt(2)
    g = spin_model(1, 1)
    return ExperimentalModel(
        StateVector.from_complex([math.sqrt(p), math.sqrt(1 - p)]), g.observable, g.payoff
    )


def test_continuity_converges_on_irrational_weights():
    g = irrational_split()
    report = solve_continuity(g, tol=1e-9)
    assert report.method == "Continuity"
    assert report.iterations <= 18
    assert report.weights.max_distance(WeightVector.born(g)) < 1e-9
    assert report.weights.w[0] == pytest.approx(1 / math.sqrt(2), abs=1e-9)


def scaled_split(scale) -> ExperimentalModel:
    g = spin_model(1, 1)
    return ExperimentalModel(StateVector.from_complex([scale, math.sqrt(3) * scale]), g.observable, g.payoff)


def test_continuity_on_a_tiny_float_state():
    report = solve_continuity(scaled_split(1e-6), tol=1e-9)
    assert report.weights.w[0] == pytest.approx(0.25, abs=1e-9)
    assert report.weights.w[1] == pytest.approx(0.75, abs=1e-9)


def test_tiny_unequal_norms_are_not_treated_as_equal():
    g = scaled_split(1e-7)
    assert choose_method(g) == "continuity"
    assert derive(g).weights.max_distance(WeightVector.born(g)) < 1e-9
    tiny_equal = ExperimentalModel(StateVector.from_complex([1e-7, 1e-7j]), g.observable, g.payoff)
    assert choose_method(tiny_equal) == "equal"


def test_continuity_on_rational_input_is_exact(rational_1_2_3):
    report = solve_continuity(rational_1_2_3)
    assert report.iterations == 1
    assert report.weights == solve_rational(rational_1_2_3).weights


def test_continuity_sends_zero_amplitudes_to_zero_weight():
    report = solve_continuity(spin_model(1, 0), tol=1e-9)
    assert report.weights.w[0] == pytest.approx(1.0, abs=1e-9)
    assert report.weights.w[1] == pytest.approx(0.0, abs=1e-9)


def test_continuity_gives_up_after_the_iterate_cap():
    with pytest.raises(NoConvergenceError):
        ContinuitySolver(tol=1e-9, max_iterates=3).solve(irrational_split())
    with pytest.raises(NoConvergenceError):
        ContinuitySolver(tol=0)


def test_auto_method_selection(equal_norm_d2, rational_1_2_3):
    assert choose_method(equal_norm_d2) == "equal"
    assert choose_method(rational_1_2_3) == "rational"
    assert choose_method(irrational_split()) == "continuity"
    assert choose_method(spin_model(1, 0)) == "continuity"
    assert derive(rational_1_2_3).method == "Rational"
    assert derive(rational_1_2_3, "auto").weights == derive(rational_1_2_3, "rational").weights
    with pytest.raises(ValueError):
        get_solver("magic")


def test_lp_weights():
    g = spin_model(1, 4)
    assert lp_weights(g, 2) == WeightVector((Fraction(1, 5), Fraction(4, 5)))
    one = lp_weights(g, 1)
    assert one.w[0] == pytest.approx(1 / 3)
    assert one.w[1] == pytest.approx(2 / 3)
    assert lp_weights(spin_model(1, 1), 4) == WeightVector((HALF, HALF))
    assert lp_weights(spin_model(1, 2), 4) == WeightVector((Fraction(1, 5), Fraction(4, 5)))
    with pytest.raises(InvalidPError):
        lp_weights(g, 0.5)


def test_lp_solver_with_p_2_is_born(rational_1_2_3):
    report = LpSolver(2).solve(rational_1_2_3)
    assert report.method == "Lp(2)"
    assert report.weights == WeightVector.born(rational_1_2_3)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, 4.0])
def test_rotation_changes_the_lp_sum(p):
    witness = lp_rotation_witness(p)
    assert witness.l2_change < 1e-12
    assert witness.lp_change > 1e-3


@pytest.mark.parametrize("turns", [0.05, 0.125, 0.3])
def test_rotation_keeps_the_l2_sum(turns):
    assert lp_rotation_witness(2, turns).lp_change < 1e-12


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_parallelogram_law_fails_off_p_2(p):
    witness = parallelogram_witness(p)
    assert witness.defect == pytest.approx(2 * 2 ** (2 / p) - 4)
    assert abs(witness.defect) > 1e-3
    assert abs(parallelogram_witness(2).defect) < 1e-12
