"""
Monte Carlo runs of multiple-channel experiments and the two-sided pilot-wave
toy model.

All randomness comes from a numpy bit generator (PCG64 unless configured
otherwise) seeded with the run seed; a run split into n shards uses seed + i
for shard i, so the same (model, weights, trials, seed, shards) always gives
the same counts.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping

import numpy as np
from scipy import stats

from born_engine import settings
from born_engine.core import Observable, StateVector
from born_engine.errors import InvalidModelError, ZeroExpectedProbabilityError
from born_engine.model import ExperimentalModel, PayoffMap, WeightVector, outcome_probs

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    bit_generator = getattr(np.random, settings.PRNG_ALGORITHM, None)
    if not (isinstance(bit_generator, type) and issubclass(bit_generator, np.random.BitGenerator)):
        raise ValueError(f"unknown bit generator {settings.PRNG_ALGORITHM!r}")
    return np.random.Generator(bit_generator(seed))


def shard_sizes(trials: int, shards: int) -> List[int]:
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    shards = max(1, min(int(shards), trials))
    base, extra = divmod(trials, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


@dataclass(frozen=True)
class TrialRecord:
    """Outcome counts of repeated trials"""

    counts: Dict[Fraction, int]
    trials: int
    rule_tag: str
    seed: int
    shards: int = 1

    def __post_init__(self):
        if sum(self.counts.values()) != self.trials:
            raise ValueError(f"counts add up to {sum(self.counts.values())}, not {self.trials}")

    def frequencies(self) -> Dict[Fraction, float]:
        return {u: n / self.trials for u, n in self.counts.items()}


def _merge(outcomes, shard_counts) -> Dict[Fraction, int]:
    totals = np.sum(np.asarray(shard_counts, dtype=np.int64), axis=0)
    return {u: int(n) for u, n in zip(outcomes, totals)}


def _run_shards(worker, sizes, seed):
    if len(sizes) == 1:
        return [worker(sizes[0], seed)]
    with ThreadPoolExecutor(max_workers=len(sizes)) as pool:
        return list(pool.map(worker, sizes, [seed + i for i in range(len(sizes))]))


def sample(
    g: ExperimentalModel,
    w: WeightVector,
    trials: int = settings.DEFAULT_TRIALS,
    seed: int = settings.DEFAULT_SEED,
    shards: int = settings.DEFAULT_SHARDS,
    rule_tag: str = "born",
) -> TrialRecord:
    """i.i.d. outcomes drawn by inverse CDF over the outcomes sorted by payoff"""
    probs = outcome_probs(g, w)
    outcomes = list(probs)
    cdf = np.cumsum([float(p) for p in probs.values()])
    cdf[-1] = 1.0

    def worker(n, shard_seed):
        draws = make_rng(shard_seed).random(n)
        index = np.minimum(np.searchsorted(cdf, draws, side="right"), len(outcomes) - 1)
        return np.bincount(index, minlength=len(outcomes))

    sizes = shard_sizes(trials, shards)
    counts = _merge(outcomes, _run_shards(worker, sizes, seed))
    logger.info(f"Sampled {trials} trials ({rule_tag}, seed {seed}, {len(sizes)} shard(s))")
    return TrialRecord(counts, trials, rule_tag, seed, len(sizes))


def stern_gerlach_model(plus=1, minus=-1) -> ExperimentalModel:
    """(phi_+ + phi_-)/sqrt(2) measured with sigma_z, outcomes Omega(+) and Omega(-)"""
    sigma_z = Observable.sigma_z()
    plus_lam, minus_lam = sigma_z.eigenvalues
    return ExperimentalModel(
        StateVector.from_mag2([Fraction(1, 2), Fraction(1, 2)]),
        sigma_z,
        PayoffMap(((plus_lam, plus), (minus_lam, minus))),
    )


@dataclass(frozen=True)
class PilotWaveConfig:
    """A two-channel state plus the probability that the particle starts on the + side"""

    bias: float = 0.5
    state: ExperimentalModel = field(default_factory=stern_gerlach_model)

    def __post_init__(self):
        bias = float(self.bias)
        if not 0.0 <= bias <= 1.0:
            raise InvalidModelError(f"bias {bias} is outside [0, 1]")
        if self.state.dim != 2:
            raise InvalidModelError(f"the pilot-wave model needs a two-channel state, got d={self.state.dim}")
        object.__setattr__(self, "bias", bias)

    def outcome_plus(self) -> Fraction:
        return self.state.channel_payoffs()[0]

    def outcome_minus(self) -> Fraction:
        return self.state.channel_payoffs()[1]

    def born_probs(self) -> Dict[Fraction, object]:
        return outcome_probs(self.state, WeightVector.born(self.state))


def pilot_wave_run(
    cfg: PilotWaveConfig,
    trials: int = settings.DEFAULT_TRIALS,
    seed: int = settings.DEFAULT_SEED,
    shards: int = settings.DEFAULT_SHARDS,
) -> TrialRecord:
    """Each trial draws the side omega (+ with probability bias); the particle
    stays on its side of the symmetry plane, so the outcome is the channel on
    that side."""
    outcomes = sorted({cfg.outcome_plus(), cfg.outcome_minus()})

    def worker(n, shard_seed):
        plus = int(np.count_nonzero(make_rng(shard_seed).random(n) < cfg.bias))
        row = dict.fromkeys(outcomes, 0)
        row[cfg.outcome_plus()] += plus
        row[cfg.outcome_minus()] += n - plus
        return [row[u] for u in outcomes]

    sizes = shard_sizes(trials, shards)
    counts = _merge(outcomes, _run_shards(worker, sizes, seed))
    logger.info(f"Pilot-wave run: bias {cfg.bias}, {trials} trials, seed {seed}")
    return TrialRecord(counts, trials, f"pilotwave:{cfg.bias:g}", seed, len(sizes))


def reflect(cfg: PilotWaveConfig) -> PilotWaveConfig:
    """The mirror symmetry of the apparatus acting on <psi, omega>: omega -> -omega.

    The equal-norm state is unchanged, so the reflected configuration keeps
    the state and swaps the side probabilities.
    """
    return PilotWaveConfig(1.0 - cfg.bias, cfg.state)


def is_state_determined(cfg: PilotWaveConfig) -> bool:
    """True when the side distribution is invariant under the symmetry of the state"""
    return math.isclose(reflect(cfg).bias, cfg.bias, abs_tol=settings.FLOAT_TOL)


@dataclass(frozen=True)
class FitRow:
    outcome: Fraction
    count: int
    frequency: float
    expected: float
    z: float


@dataclass(frozen=True)
class FitResult:
    chi_square: float
    p_value: float
    dof: int
    rows: List[FitRow]

    @property
    def z_scores(self) -> Dict[Fraction, float]:
        return {row.outcome: row.z for row in self.rows}

    def critical_value(self, level: float = 0.99) -> float:
        if self.dof == 0:
            return 0.0
        return float(stats.chi2.ppf(level, self.dof))

    def passes(self, level: float = 0.99) -> bool:
        """chi-square below the given quantile of its reference distribution"""
        return self.dof == 0 or self.chi_square < self.critical_value(level)


def goodness_of_fit(record: TrialRecord, expected: Mapping) -> FitResult:
    """Pearson chi-square over the outcomes plus per-outcome binomial z-scores"""
    expected = {Fraction(u): float(p) for u, p in expected.items()}
    missing = [str(u) for u in record.counts if u not in expected]
    if missing:
        raise ZeroExpectedProbabilityError(f"no expected probability for outcomes {missing}")
    zero = [str(u) for u, p in expected.items() if p <= 0]
    if zero:
        raise ZeroExpectedProbabilityError(f"expected probability 0 for outcomes {zero}")

    outcomes = sorted(expected)
    n = record.trials
    observed = np.array([record.counts.get(u, 0) for u in outcomes], dtype=float)
    probs = np.array([expected[u] for u in outcomes])
    probs = probs / probs.sum()

    rows = []
    for u, count, p in zip(outcomes, observed, probs):
        frequency = count / n
        spread = math.sqrt(p * (1 - p) / n)
        z = (frequency - p) / spread if spread > 0 else 0.0
        rows.append(FitRow(u, int(count), float(frequency), float(p), float(z)))

    dof = len(outcomes) - 1
    if dof == 0:
        return FitResult(0.0, 1.0, 0, rows)
    chisq, p_value = stats.chisquare(observed, probs * n)
    return FitResult(float(chisq), float(p_value), dof, rows)
