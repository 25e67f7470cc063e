from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from born_engine.errors import InvalidModelError, ZeroExpectedProbabilityError
from born_engine.model import ExperimentalModel, WeightVector, outcome_probs
from born_engine.sim import (
    PilotWaveConfig,
    TrialRecord,
    goodness_of_fit,
    is_state_determined,
    make_rng,
    pilot_wave_run,
    reflect,
    sample,
    shard_sizes,
    stern_gerlach_model,
)

HALF = Fraction(1, 2)


def test_rng_is_pcg64_and_reproducible():
    assert isinstance(make_rng(1).bit_generator, np.random.PCG64)
    assert make_rng(42).random() == make_rng(42).random()


def test_rng_bit_generator_follows_the_setting(monkeypatch):
    monkeypatch.setattr("born_engine.settings.PRNG_ALGORITHM", "Philox")
    assert isinstance(make_rng(1).bit_generator, np.random.Philox)
    monkeypatch.setattr("born_engine.settings.PRNG_ALGORITHM", "Mersenne")
    with pytest.raises(ValueError):
        make_rng(1)


def test_shard_sizes():
    assert shard_sizes(10, 3) == [4, 3, 3]
    assert shard_sizes(2, 5) == [1, 1]
    with pytest.raises(ValueError):
        shard_sizes(0, 1)


def test_trial_record_counts_must_add_up():
    with pytest.raises(ValueError):
        TrialRecord({Fraction(1): 3}, 4, "born", 0)


def test_point_mass_always_gives_the_first_outcome(equal_norm_d2):
    record = sample(equal_norm_d2, WeightVector.point_mass(2, 0), trials=5000, seed=3)
    assert record.counts == {Fraction(-1): 0, Fraction(1): 5000}


def test_same_seed_same_counts(rational_1_2_3):
    w = WeightVector.born(rational_1_2_3)
    assert sample(rational_1_2_3, w, 20000, seed=4, shards=3) == sample(rational_1_2_3, w, 20000, seed=4, shards=3)
    sharded = sample(rational_1_2_3, w, 20000, seed=4, shards=3)
    assert sharded.shards == 3
    assert sum(sharded.counts.values()) == 20000


def test_born_sampling_frequencies_within_three_sigma(equal_norm_d2):
    record = sample(equal_norm_d2, WeightVector.born(equal_norm_d2), trials=100_000, seed=0)
    fit = goodness_of_fit(record, outcome_probs(equal_norm_d2, WeightVector.born(equal_norm_d2)))
    assert all(abs(z) < 3 for z in fit.z_scores.values())


def test_born_sampling_passes_chi_square(rational_1_2_3):
    born = WeightVector.born(rational_1_2_3)
    record = sample(rational_1_2_3, born, trials=100_000, seed=1)
    fit = goodness_of_fit(record, outcome_probs(rational_1_2_3, born))
    assert fit.dof == 2
    assert fit.chi_square < fit.critical_value(0.999)


def test_goodness_of_fit_values():
    record = TrialRecord({Fraction(-1): 30000, Fraction(1): 70000}, 100_000, "test", 0)
    fit = goodness_of_fit(record, {-1: HALF, 1: HALF})
    assert fit.z_scores[Fraction(1)] == pytest.approx(126.4911, abs=1e-3)
    assert fit.z_scores[Fraction(-1)] == pytest.approx(-126.4911, abs=1e-3)
    assert fit.chi_square == pytest.approx(16000.0)
    assert not fit.passes()

    exact = TrialRecord({Fraction(-1): 500, Fraction(1): 500}, 1000, "test", 0)
    assert goodness_of_fit(exact, {-1: HALF, 1: HALF}).chi_square == 0
    assert goodness_of_fit(exact, {-1: HALF, 1: HALF}).passes()


def test_goodness_of_fit_rejects_zero_expected_probability():
    record = TrialRecord({Fraction(-1): 0, Fraction(1): 10}, 10, "test", 0)
    with pytest.raises(ZeroExpectedProbabilityError):
        goodness_of_fit(record, {-1: 0, 1: 1})
    with pytest.raises(ZeroExpectedProbabilityError):
        goodness_of_fit(record, {1: 1})


def test_single_outcome_fit_has_no_degrees_of_freedom():
    record = TrialRecord({Fraction(4): 10}, 10, "test", 0)
    fit = goodness_of_fit(record, {4: 1})
    assert fit.dof == 0
    assert fit.chi_square == 0.0
    assert fit.passes()


def test_pilot_wave_with_certain_side():
    record = pilot_wave_run(PilotWaveConfig(bias=1.0), trials=1000, seed=7)
    assert record.counts[Fraction(1)] == 1000
    assert record.rule_tag == "pilotwave:1"


def test_pilot_wave_config_validation():
    with pytest.raises(InvalidModelError):
        PilotWaveConfig(bias=1.5)
    with pytest.raises(InvalidModelError):
        PilotWaveConfig(state=ExperimentalModel.build([1], [1], {1: 1}))


def test_reflection_symmetry():
    cfg = PilotWaveConfig(0.7)
    assert reflect(cfg).bias == pytest.approx(0.3)
    assert reflect(reflect(cfg)).bias == pytest.approx(0.7)
    assert is_state_determined(PilotWaveConfig(0.5))
    assert not is_state_determined(cfg)


def test_stern_gerlach_model():
    g = stern_gerlach_model(plus=2, minus=-3)
    assert g.channel_payoffs() == (2, -3)
    assert PilotWaveConfig(state=g).born_probs() == {-3: HALF, 2: HALF}


@pytest.mark.slow
def test_symmetric_pilot_wave_reproduces_born_statistics():
    cfg = PilotWaveConfig(0.5)
    failures = sum(
        not goodness_of_fit(pilot_wave_run(cfg, 100_000, seed), cfg.born_probs()).passes(0.99)
        for seed in range(20)
    )
    assert failures <= 1


@pytest.mark.slow
def test_symmetric_pilot_wave_matches_born_sampling():
    cfg = PilotWaveConfig(0.5)
    born = WeightVector.born(cfg.state)
    failures = 0
    for seed in range(20):
        pilot = pilot_wave_run(cfg, 100_000, seed)
        sampled = sample(cfg.state, born, 100_000, seed + 1000)
        table = [[pilot.counts[u] for u in sorted(pilot.counts)], [sampled.counts[u] for u in sorted(sampled.counts)]]
        _, p_value, _, _ = stats.chi2_contingency(table)
        failures += p_value < 0.01
    assert failures <= 2


@pytest.mark.slow
def test_biased_pilot_wave_is_detected():
    cfg = PilotWaveConfig(0.7)
    for seed in range(20):
        fit = goodness_of_fit(pilot_wave_run(cfg, 100_000, seed), cfg.born_probs())
        assert all(abs(z) > 5 for z in fit.z_scores.values())
        assert not fit.passes()


@pytest.mark.slow
def test_frequencies_approach_the_weights():
    g = stern_gerlach_model()
    born = WeightVector.born(g)

    def median_error(trials):
        errors = [
            abs(sample(g, born, trials, seed).frequencies()[Fraction(1)] - 0.5) for seed in range(20)
        ]
        return float(np.median(errors))

    assert median_error(100_000) < median_error(1000)
