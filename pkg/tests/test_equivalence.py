from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from born_engine.equivalence import (
    Coarsen,
    Permute,
    Phase,
    Refine,
    Relabel,
    equal_norm_permutation_constraints,
    has_equal_norms,
    payoff_group_constraints,
    phase_compensation,
    stern_gerlach_chain,
    transform,
    transposition_chain,
)
from born_engine.errors import IncompatibleTransformationError, NotEqualNormError
from born_engine.linalg import LinearEquation, LinearSystem, uniqueness_analysis
from born_engine.model import ExperimentalModel, WeightVector, born_value, outcome_probs, random_model
from tests.strategies import exact_models

HALF = Fraction(1, 2)


def random_transformation(rng, g: ExperimentalModel):
    kind = int(rng.integers(0, 5))
    d = g.dim
    if kind == 0:
        spectrum = g.observable.spectrum()
        images = rng.permutation(len(spectrum))
        offset = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
        return Relabel(tuple((lam, spectrum[int(j)] * 2 + offset) for lam, j in zip(spectrum, images)))
    if kind == 1:
        return Coarsen()
    if kind == 2:
        return Phase(tuple(Fraction(int(rng.integers(0, 12)), 12) for _ in range(d)))
    if kind == 3:
        return Permute(tuple(int(j) for j in rng.permutation(d)))
    return Refine(tuple(int(z) for z in rng.integers(1, 4, size=d)))


def test_permutation_example():
    """<c+ phi+ + c- phi-, sigma_z, Omega> -> <c- phi+ + c+ phi-, X', Omega> with X' = -sigma_z"""
    g = ExperimentalModel.build([Fraction(1, 3), Fraction(2, 3)], [HALF, -HALF], {HALF: 1, -HALF: -1})
    edge = transform(g, Permute((1, 0)))
    assert edge.target.psi.mag2s() == (Fraction(2, 3), Fraction(1, 3))
    assert edge.target.observable.eigenvalues == (-HALF, HALF)
    assert edge.target.channel_payoffs() == (-1, 1)

    relabeled = transform(edge.target, Relabel.negation(edge.target.observable.spectrum())).target
    assert relabeled.observable.eigenvalues == (HALF, -HALF)
    assert relabeled.payoff(HALF) == -1
    assert born_value(relabeled) == born_value(g)


def test_trivial_refinement_is_the_identity_edge(equal_norm_d2):
    edge = transform(equal_norm_d2, Refine((1, 1)))
    assert edge.is_identity


def test_born_value_is_invariant_along_random_edges():
    rng = np.random.default_rng(11)
    for _ in range(500):
        g = random_model(rng, max_dim=5)
        edge = transform(g, random_transformation(rng, g))
        assert born_value(edge.source) == born_value(edge.target)
        source_report, target_report = edge.verify()
        assert source_report.realized
        assert target_report.realized, target_report.detail


def test_weights_move_along_refinement_edges(rational_1_2_3):
    edge = transform(rational_1_2_3, Refine((1, 2, 3)))
    refined = edge.target
    assert has_equal_norms(refined)
    assert edge.pull_back_weights(WeightVector.born(refined)) == WeightVector.born(rational_1_2_3)
    assert edge.push_forward_weights(WeightVector.born(rational_1_2_3)) == WeightVector.uniform(6)
    assert outcome_probs(refined, WeightVector.born(refined)) == outcome_probs(
        rational_1_2_3, WeightVector.born(rational_1_2_3)
    )


def test_pull_back_equation_uses_block_means(rational_1_2_3):
    edge = transform(rational_1_2_3, Refine((1, 2, 3)))
    normalization = edge.pull_back_equation(LinearEquation.normalization(6))
    assert normalization.coeffs == (1, 1, 1)
    pulled = edge.pull_back_equation(LinearEquation((0, 1, 0, 0, 0, 0), 0))
    assert pulled.coeffs == (0, HALF, 0)
    assert "refine" in pulled.provenance


@given(exact_models())
@settings(max_examples=100)
def test_invertible_transformations_round_trip(g):
    """Property: permute, phase and relabel followed by their inverses return the model"""
    d = g.dim
    spectrum = g.observable.spectrum()
    for t in (
        Permute(tuple(reversed(range(d)))),
        Phase(tuple(Fraction(k, 7) for k in range(d))),
        Relabel.shift(3, spectrum),
        Relabel.negation(spectrum),
    ):
        assert t.inverse().apply(t.apply(g)) == g


@given(exact_models())
@settings(max_examples=100)
def test_coarsening_preserves_outcome_probabilities(g):
    """Property: coarse graining changes no channel weight or payoff"""
    target = transform(g, Coarsen()).target
    assert target.channel_payoffs() == g.channel_payoffs()
    w = WeightVector.born(g)
    assert outcome_probs(target, w) == outcome_probs(g, w)


def test_equal_norm_constraints():
    g = ExperimentalModel.build([1, 1], [1, -1], {1: 1, -1: -1})
    equations = equal_norm_permutation_constraints(g)
    assert [eq.coeffs for eq in equations] == [(1, -1), (1, 1)]

    single = ExperimentalModel.build([1], [1], {1: 1})
    assert [eq.coeffs for eq in equal_norm_permutation_constraints(single)] == [(1,)]

    with pytest.raises(NotEqualNormError):
        equal_norm_permutation_constraints(ExperimentalModel.build([1, 2], [1, -1], {1: 1, -1: -1}))


def test_repeated_payoffs_skip_same_payoff_transpositions(repeated_payoff_d3):
    equations = equal_norm_permutation_constraints(repeated_payoff_d3)
    tags = [eq.tag for eq in equations]
    assert tags == ["w1 = w3", "w2 = w3", "sum w_k = 1"]


@given(exact_models(equal_norms=True))
@settings(max_examples=100)
def test_born_weights_satisfy_the_generated_constraints(g):
    """Property: Born weights solve every equal-norm constraint system"""
    born = WeightVector.born(g).w
    assert LinearSystem.over_weights(g.dim, equal_norm_permutation_constraints(g)).is_satisfied_by(born)
    assert LinearSystem.over_weights(g.dim, payoff_group_constraints(g.channel_payoffs())).is_satisfied_by(born)


@given(exact_models())
@settings(max_examples=100)
def test_group_constraints_have_rank_equal_to_outcome_count(g):
    """Property: d - D free directions remain after the payoff-group constraints"""
    report = uniqueness_analysis(LinearSystem.over_weights(g.dim, payoff_group_constraints(g.channel_payoffs())))
    assert report.solution_dim == g.dim - len(g.distinct_payoffs())


def test_phase_compensation():
    g = ExperimentalModel.build([1, 1, 1], [1, 2, 3], {1: 1, 2: 2, 3: 3}, phases=[Fraction(1, 4), 0, Fraction(2, 3)])
    edge = phase_compensation(g, [0, 0, 0])
    assert edge.target.psi.phases() == (0, 0, 0)
    assert edge.target.psi.mag2s() == g.psi.mag2s()
    assert phase_compensation(g, g.psi.phases()).is_identity
    with pytest.raises(IncompatibleTransformationError):
        phase_compensation(g, [0, 0])


def test_transposition_chain_exchanges_payoffs():
    g = ExperimentalModel.build(
        [2, 2, 2], [1, 2, 3], {1: 5, 2: -1, 3: 7}, phases=[Fraction(1, 4), Fraction(1, 3), 0]
    )
    chain = transposition_chain(g, 0, 2)
    end = chain[-1].target
    assert end.psi == g.psi
    assert end.observable == g.observable
    assert end.channel_payoffs() == (7, -1, 5)
    assert all(edge.source == previous.target for previous, edge in zip(chain, chain[1:]))
    with pytest.raises(IncompatibleTransformationError):
        transposition_chain(ExperimentalModel.build([1, 1], [1, 1], {1: 1}), 0, 1)


def test_stern_gerlach_chain_negates_the_payoff(equal_norm_d2):
    end = stern_gerlach_chain(equal_norm_d2)[-1].target
    assert end.psi == equal_norm_d2.psi
    assert end.payoff == equal_norm_d2.payoff.negated()
    with pytest.raises(IncompatibleTransformationError):
        stern_gerlach_chain(ExperimentalModel.build([1, 1], [1, 2], {1: 1, 2: 2}))


def test_incompatible_transformations(equal_norm_d2):
    with pytest.raises(IncompatibleTransformationError):
        transform(equal_norm_d2, Permute((0, 1, 2)))
    with pytest.raises(IncompatibleTransformationError):
        transform(equal_norm_d2, Relabel(((HALF, 1), (-HALF, 1))))
    with pytest.raises(IncompatibleTransformationError):
        transform(equal_norm_d2, Relabel(((HALF, 1),)))
    with pytest.raises(IncompatibleTransformationError):
        Refine((1, 0))
    with pytest.raises(IncompatibleTransformationError):
        Permute((0, 0))
