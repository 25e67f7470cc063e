import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence

from born_engine.linalg import LinearSystem, uniqueness_analysis
from born_engine.model import ExperimentalModel, WeightVector


@dataclass(frozen=True)
class DerivationReport:
    """Result of one derivation.

    weights is None when the generated constraints leave the channel weights
    undetermined; outcome_probs maps each payoff value to its probability.
    gauge_dim counts the weight directions the payoff-group constraints leave
    free (d minus the number of distinct payoffs).
    """

    method: str
    weights: Optional[WeightVector]
    outcome_probs: Optional[Dict[Fraction, object]]
    unique: bool
    gauge_dim: int
    gauge_note: str = ""
    constraints_used: int = 0
    iterations: Optional[int] = None
    refined_dim: Optional[int] = None
    details: dict = field(default_factory=dict, compare=False)

    def expectation(self):
        """sum_j p_j u_j"""
        if self.outcome_probs is None:
            return None
        return sum((p * u for u, p in self.outcome_probs.items()), 0 * next(iter(self.outcome_probs.values())))

    def renamed(self, method: str, **changes) -> "DerivationReport":
        return replace(self, method=method, **changes)


class BaseSolver:
    """Common plumbing for the derivation methods"""

    name = "base"

    @property
    def logger(self) -> logging.Logger:
        return logging.getLogger(f"born_engine.solvers.{self.name}")

    def solve(self, g: ExperimentalModel) -> DerivationReport:
        raise NotImplementedError


def transposition_count(sizes: Sequence[int]) -> int:
    """Number of w_j = w_k equations between channels of different payoff groups"""
    total = sum(sizes)
    return (total * total - sum(n * n for n in sizes)) // 2


def gauge_description(
    payoffs: Sequence, probs: Optional[Dict], gauge_dim: int, representative: bool = False
) -> str:
    if gauge_dim == 0:
        return ""
    groups = {}
    for k, u in enumerate(payoffs):
        groups.setdefault(u, []).append(k)
    parts = []
    for u in sorted(groups):
        channels = groups[u]
        if len(channels) > 1:
            total = probs[u] if probs else "?"
            parts.append(f"{' + '.join(f'w{k + 1}' for k in channels)} = {total}")
    note = f"{gauge_dim} free weight direction(s); only payoff-group sums are fixed: " + ", ".join(parts)
    if representative:
        note += (
            ". The listed weights are the representative fixed by the raw transposition edges;"
            " the outcome-level system does not determine them"
        )
    return note


def summarize(
    method: str,
    payoffs: Sequence,
    raw: LinearSystem,
    group: LinearSystem,
    lift: Optional[Callable] = None,
    constraints_used: int = 0,
    refined_dim: Optional[int] = None,
) -> DerivationReport:
    """Solve the transposition system and its payoff-group form and report.

    raw is the system of individual transposition constraints (possibly over
    refined or block-mean unknowns, mapped back to channel weights by lift);
    group is the gauge-invariant system over the channel weights.
    """
    raw_rank = uniqueness_analysis(raw)
    group_rank = uniqueness_analysis(group)

    indicators = {}
    for k, u in enumerate(payoffs):
        indicators.setdefault(u, [0] * len(payoffs))[k] = 1
    probs = {}
    for u in sorted(indicators):
        if not group_rank.determines(indicators[u]):
            probs = None
            break
        probs[u] = group_rank.value_of(indicators[u])

    weights = None
    if group_rank.unique:
        weights = WeightVector(group_rank.particular)
    elif raw_rank.unique:
        values = raw_rank.particular
        weights = WeightVector(tuple(lift(values)) if lift else values)

    return DerivationReport(
        method=method,
        weights=weights,
        outcome_probs=probs,
        unique=group_rank.unique,
        gauge_dim=group_rank.solution_dim,
        gauge_note=gauge_description(payoffs, probs, group_rank.solution_dim, representative=weights is not None),
        constraints_used=constraints_used or len(raw.equations),
        refined_dim=refined_dim,
        details={"raw_rank": raw_rank.rank, "group_rank": group_rank.rank},
    )
