"""Turn-level reward components and trajectory aggregation.

Four turn components, each in [0, 1]: cognitive reliability, trace quality,
reverse-perspective plausibility, and an overthinking penalty. The turn
reward is their weighted sum with the penalty subtracted; the trajectory
score adds a weighted emotional gain (final minus initial emotional state,
each on the 1-5 scale). Judge-backed scorers map 1-5 elicitations affinely
onto [0, 1]; judge failures score the component minimum and carry a flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .agents import Agent, ChatMessage, SamplingParams
from .judging import elicit_scale
from .lookahead import RpConfig
from .prompts import COGNITIVE_JUDGE, STRATEGY_FIT_JUDGE, TRACE_JUDGE, render_prompt
from .trace import DEFAULT_SCHEMA, ReasoningTrace, TraceSchema, think_text, validate_dag


class RewardError(ValueError):
    """Base class for reward computation errors."""


class NegativeWeight(RewardError):
    """Reward weights must be nonnegative."""


class OutOfRange(RewardError):
    """A value outside its declared range (components in [0,1], emotions in [1,5])."""


@dataclass(frozen=True)
class RewardWeights:
    """Nonnegative coefficients for the four turn components and the emotional term."""

    cog: float = 1.0
    arg: float = 1.0
    rp: float = 1.0
    overthink: float = 1.0
    emo: float = 1.0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0:
                raise NegativeWeight(f"weight {name!r} must be >= 0, got {value}")

    def as_dict(self) -> dict[str, float]:
        return {
            "cog": self.cog,
            "arg": self.arg,
            "rp": self.rp,
            "overthink": self.overthink,
            "emo": self.emo,
        }


@dataclass(frozen=True)
class TurnRewards:
    """The four component scores for one turn, plus the aggregated value."""

    cog: float
    arg: float
    rp: float
    overthink: float
    total: float | None = None

    def __post_init__(self) -> None:
        for name in ("cog", "arg", "rp", "overthink"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise OutOfRange(f"component {name!r} must be in [0, 1], got {value}")

    def to_record(self) -> dict:
        return {
            "cog": self.cog,
            "arg": self.arg,
            "rp": self.rp,
            "overthink": self.overthink,
            "total": self.total,
        }


@dataclass(frozen=True)
class EmotionTrace:
    """Initial and final emotional-state scores on the 1-5 scale."""

    initial: float
    final: float

    def __post_init__(self) -> None:
        for name, value in (("initial", self.initial), ("final", self.final)):
            if not 1.0 <= value <= 5.0:
                raise OutOfRange(f"{name} emotion must be in [1, 5], got {value}")


def scale_to_unit(score: float) -> float:
    """Affine map from the 1-5 judge scale onto [0, 1]."""
    return (score - 1.0) / 4.0


def score_cog(
    context: str,
    response: str,
    judge: Agent,
    params: SamplingParams,
) -> tuple[float, str | None]:
    """Cognitive reliability of the response against the dialogue context."""
    body = render_prompt(COGNITIVE_JUDGE, {"context": context, "response": response})
    score, flag = elicit_scale(judge, [ChatMessage("user", body)], params)
    if flag is not None:
        return 0.0, flag
    return scale_to_unit(score), None


def score_arg(
    trace: ReasoningTrace,
    context: str,
    judge: Agent,
    params: SamplingParams,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> tuple[float, str | None]:
    """Trace quality: structural check blended 50/50 with the judge's semantic score.

    Gated traces score the dependency-edge pass fraction plus a judged
    semantic score over the trace text; bare responses pass structure
    trivially and are judged on the implicit strategy fit instead.
    """
    if trace.gate == 1 and trace.state is not None:
        structural = validate_dag(trace.state).pass_fraction
        body = render_prompt(
            TRACE_JUDGE,
            {
                "context": context,
                "trace_text": think_text(trace, schema),
                "response": trace.response,
            },
        )
    else:
        structural = 1.0
        body = render_prompt(
            STRATEGY_FIT_JUDGE, {"context": context, "response": trace.response}
        )
    score, flag = elicit_scale(judge, [ChatMessage("user", body)], params)
    semantic = 0.0 if flag is not None else scale_to_unit(score)
    return (structural + semantic) / 2.0, flag


def score_overthink(trace: ReasoningTrace, query_simple: bool, config: RpConfig) -> float:
    """Penalty for structured reasoning on simple queries or excess lookahead steps.

    Half the penalty fires when a gated trace answers a simple query; the
    other half scales with emitted steps beyond the configured depth.
    """
    gated_simple = 1.0 if (query_simple and trace.gate == 1) else 0.0
    excess = max(0, len(trace.rp_steps) - config.depth) / max(1, config.depth)
    return min(1.0, 0.5 * gated_simple + 0.5 * excess)


def aggregate_turn(components: TurnRewards, weights: RewardWeights) -> float:
    """Weighted sum of the turn components with the penalty subtracted."""
    return (
        weights.cog * components.cog
        + weights.arg * components.arg
        + weights.rp * components.rp
        - weights.overthink * components.overthink
    )


def emo_reward(trace: EmotionTrace) -> float:
    """Net emotional gain over the trajectory: final minus initial score."""
    return trace.final - trace.initial


def trajectory_reward(
    turns: Sequence[TurnRewards],
    emo: EmotionTrace,
    weights: RewardWeights,
) -> float:
    """Sum of per-turn rewards plus the weighted trajectory-level emotional gain.

    An empty turn list is allowed and contributes only the emotional term.
    """
    return sum(aggregate_turn(turn, weights) for turn in turns) + weights.emo * emo_reward(emo)
