"""Evaluation metrics over recorded episodes.

Six numbers summarize a run: success rate (percent of episodes whose judge
marked a satisfactory resolution within the turn limit), average turns to
first success (successful episodes only), final emotional state, emotional
gain per turn, turn-weighted empathic appropriateness, and factual accuracy
(percent of factually reliable turns). All arithmetic is plain-Python
accumulation so summaries are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .environment import TerminationReason, Trajectory


class MetricsError(ValueError):
    pass


class EmptySet(MetricsError):
    pass


class NoSuccesses(MetricsError):
    """Average turns is undefined when nothing succeeded; reported absent, never 0."""


class ZeroTurns(MetricsError):
    pass


@dataclass(frozen=True)
class EpisodeOutcome:
    success_turn: int | None
    total_turns: int
    initial_emotion: float
    final_emotion: float
    ea_scores: tuple[float, ...]
    fa_flags: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.success_turn is not None and self.success_turn > self.total_turns:
            raise MetricsError("success_turn cannot exceed total_turns")


def outcome_from_trajectory(trajectory: Trajectory) -> EpisodeOutcome:
    success_turn = None
    ea_scores: list[float] = []
    fa_flags: list[int] = []
    for turn in trajectory.turns:
        if turn.judge_turn is None:
            continue
        if success_turn is None and turn.judge_turn.sr_proxy == 1:
            success_turn = turn.index
        ea_scores.append(turn.judge_turn.ea)
        fa_flags.append(turn.judge_turn.fa)
    return EpisodeOutcome(
        success_turn=success_turn,
        total_turns=len(trajectory.turns),
        initial_emotion=trajectory.initial_emotion,
        final_emotion=trajectory.final_emotion,
        ea_scores=tuple(ea_scores),
        fa_flags=tuple(fa_flags),
    )


def outcomes_from_trajectories(
    trajectories: Sequence[Trajectory], include_aborted: bool = False
) -> list[EpisodeOutcome]:
    return [
        outcome_from_trajectory(t)
        for t in trajectories
        if include_aborted or t.termination.reason is not TerminationReason.ABORT
    ]


def _require(outcomes: Sequence[EpisodeOutcome]) -> None:
    if not outcomes:
        raise EmptySet("no episodes to summarize")


def success_rate(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Percent of episodes with a success turn."""
    _require(outcomes)
    hits = sum(1 for o in outcomes if o.success_turn is not None)
    return 100.0 * hits / len(outcomes)


def avg_turns(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Mean first-success turn over successful episodes only."""
    _require(outcomes)
    successes = [o.success_turn for o in outcomes if o.success_turn is not None]
    if not successes:
        raise NoSuccesses("no successful episodes")
    return sum(successes) / len(successes)


def emotional_state(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Mean final emotional-state score across episodes."""
    _require(outcomes)
    return sum(o.final_emotion for o in outcomes) / len(outcomes)


def eg_per_turn(outcome: EpisodeOutcome) -> float:
    """Emotional gain normalized by episode length: (final - initial) / turns."""
    if outcome.total_turns < 1:
        raise ZeroTurns("an episode needs at least one turn")
    return (outcome.final_emotion - outcome.initial_emotion) / outcome.total_turns


def mean_eg_per_turn(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Unweighted mean of the per-episode gain-per-turn values."""
    _require(outcomes)
    return sum(eg_per_turn(o) for o in outcomes) / len(outcomes)


def empathic_appropriateness(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Turn-weighted mean appropriateness over all turns of all episodes."""
    _require(outcomes)
    total = 0.0
    count = 0
    for outcome in outcomes:
        for score in outcome.ea_scores:
            total += score
            count += 1
    if count == 0:
        raise EmptySet("no judged turns")
    return total / count


def factual_accuracy(outcomes: Sequence[EpisodeOutcome]) -> float:
    """Percent of factually reliable turns over all episodes."""
    _require(outcomes)
    hits = 0
    count = 0
    for outcome in outcomes:
        for flag in outcome.fa_flags:
            hits += flag
            count += 1
    if count == 0:
        raise EmptySet("no judged turns")
    return 100.0 * hits / count


@dataclass(frozen=True)
class MetricsSummary:
    success_rate: float
    avg_turns: float | None
    emotional_state: float
    eg_per_turn: float
    empathic_appropriateness: float
    factual_accuracy: float
    episodes: int

    def __post_init__(self) -> None:
        for name in ("success_rate", "factual_accuracy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise MetricsError(f"{name} must be a percentage, got {value}")
        for name in ("emotional_state", "empathic_appropriateness"):
            value = getattr(self, name)
            if not 1.0 <= value <= 5.0:
                raise MetricsError(f"{name} must be on the 1-5 scale, got {value}")

    def to_record(self) -> dict:
        return {
            "success_rate": self.success_rate,
            "avg_turns": self.avg_turns,
            "emotional_state": self.emotional_state,
            "eg_per_turn": self.eg_per_turn,
            "empathic_appropriateness": self.empathic_appropriateness,
            "factual_accuracy": self.factual_accuracy,
            "episodes": self.episodes,
        }


def summarize(outcomes: Sequence[EpisodeOutcome]) -> MetricsSummary:
    _require(outcomes)
    sr = success_rate(outcomes)
    try:
        at = avg_turns(outcomes)
    except NoSuccesses:
        at = None
    return MetricsSummary(
        success_rate=sr,
        avg_turns=at,
        emotional_state=emotional_state(outcomes),
        eg_per_turn=mean_eg_per_turn(outcomes),
        empathic_appropriateness=empathic_appropriateness(outcomes),
        factual_accuracy=factual_accuracy(outcomes),
        episodes=len(outcomes),
    )


def format_table(summary: MetricsSummary) -> str:
    at = f"{summary.avg_turns:.2f}" if summary.avg_turns is not None else "-"
    lines = [
        f"{'metric':<28}{'value':>10}",
        f"{'success rate (%)':<28}{summary.success_rate:>10.2f}",
        f"{'avg turns to success':<28}{at:>10}",
        f"{'emotional state (1-5)':<28}{summary.emotional_state:>10.2f}",
        f"{'emotional gain / turn':<28}{summary.eg_per_turn:>10.3f}",
        f"{'empathic appropriateness':<28}{summary.empathic_appropriateness:>10.2f}",
        f"{'factual accuracy (%)':<28}{summary.factual_accuracy:>10.2f}",
        f"{'episodes':<28}{summary.episodes:>10d}",
    ]
    return "\n".join(lines)
