"""Group-normalized advantages and the clipped surrogate over trajectory scores.

Advantages are trajectory scores normalized by the group mean and the
population (1/G) standard deviation with a small stabilizer in the
denominator. Likelihood ratios are inputs here, not computed: token
log-probabilities belong to the external trainer, which consumes the
exported batch records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .environment import Trajectory

DEFAULT_ADVANTAGE_EPSILON = 1e-8


class GrpoError(ValueError):
    pass


class EmptyGroup(GrpoError):
    pass


class NonpositiveEpsilon(GrpoError):
    pass


class NonpositiveRatio(GrpoError):
    pass


@dataclass(frozen=True)
class SurrogateConfig:
    """Clip width for the surrogate; the KL coefficient is recorded, not applied."""

    clip: float = 0.2
    kl_beta: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 < self.clip < 1.0:
            raise GrpoError(f"clip must be in (0, 1), got {self.clip}")
        if self.kl_beta < 0:
            raise GrpoError(f"kl_beta must be >= 0, got {self.kl_beta}")


def group_stats(scores: Sequence[float]) -> tuple[float, float]:
    """Mean and population (1/G) standard deviation of a score group."""
    if len(scores) == 0:
        raise EmptyGroup("a group needs at least one trajectory score")
    values = np.asarray(scores, dtype=np.float64)
    if values.max() == values.min():
        # Exact for constant groups: mean-of-equal floats can round otherwise.
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std())


def advantages(
    scores: Sequence[float], epsilon: float = DEFAULT_ADVANTAGE_EPSILON
) -> list[float]:
    """(score - mean) / (popstd + epsilon), elementwise; constant groups are all-zero."""
    if epsilon <= 0:
        raise NonpositiveEpsilon(f"epsilon must be > 0, got {epsilon}")
    mean, std = group_stats(scores)
    values = np.asarray(scores, dtype=np.float64)
    return [float(v) for v in (values - mean) / (std + epsilon)]


@dataclass(frozen=True)
class GroupBatch:
    group_id: str
    scores: tuple[float, ...]
    mean: float
    std: float
    epsilon: float
    advantages: tuple[float, ...]

    @classmethod
    def from_scores(
        cls,
        group_id: str,
        scores: Sequence[float],
        epsilon: float = DEFAULT_ADVANTAGE_EPSILON,
    ) -> "GroupBatch":
        mean, std = group_stats(scores)
        return cls(
            group_id=group_id,
            scores=tuple(float(s) for s in scores),
            mean=mean,
            std=std,
            epsilon=epsilon,
            advantages=tuple(advantages(scores, epsilon)),
        )


def clipped_term(ratio: float, advantage: float, config: SurrogateConfig) -> float:
    """Per-trajectory clipped surrogate: min(ratio * A, clip(ratio) * A)."""
    if ratio <= 0:
        raise NonpositiveRatio(f"likelihood ratio must be > 0, got {ratio}")
    clipped = min(max(ratio, 1.0 - config.clip), 1.0 + config.clip)
    return min(ratio * advantage, clipped * advantage)


def sequence_ratio(step_ratios: Sequence[float]) -> float:
    """Product of per-turn ratios, computed in log space for stability."""
    total = 0.0
    for ratio in step_ratios:
        if ratio <= 0:
            raise NonpositiveRatio(f"per-turn ratio must be > 0, got {ratio}")
        total += math.log(ratio)
    return math.exp(total)


def export_batch(batch: GroupBatch, trajectories: Sequence[Trajectory]) -> list[dict]:
    """One record per trajectory for the external trainer; stable field order."""
    if len(trajectories) != len(batch.scores):
        raise GrpoError(
            f"group {batch.group_id!r}: {len(batch.scores)} scores but "
            f"{len(trajectories)} trajectories"
        )
    records = []
    for trajectory, score, advantage in zip(trajectories, batch.scores, batch.advantages):
        records.append(
            {
                "group_id": batch.group_id,
                "trajectory_id": trajectory.trajectory_id,
                "reward": score,
                "advantage": advantage,
                "turns": [
                    {"context": turn.context, "response": turn.trace.response}
                    for turn in trajectory.turns
                ],
            }
        )
    return records


def write_batch_records(path: str, records: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_batch_records(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]
