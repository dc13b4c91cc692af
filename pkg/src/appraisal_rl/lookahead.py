"""Reverse-perspective lookahead: predicted user-side transitions and their reward.

After a candidate response, a transition predictor is applied iteratively
(up to a configured depth) to estimate how the user's needs, appraisal, and
emotional state would evolve. The final predicted transition is judged on
three criteria (contextual consistency, psychological plausibility, and
strategy consistency) and mapped to a [0, 1] reward. Lookahead happens only
at scoring time; its artifacts never enter the forward dialogue context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .agents import Agent, ChatMessage, SamplingParams
from .judging import elicit_scale
from .prompts import TRANSITION_FIRST, TRANSITION_JUDGE, TRANSITION_NEXT, render_prompt
from .trace import RpStep

_TRANSITION_RE = re.compile(
    r"Needs\s*:\s*(?P<needs>.+?)\s*(?:\||\n)+\s*"
    r"Appraisal\s*:\s*(?P<appraisal>.+?)\s*(?:\||\n)+\s*"
    r"Emotion\s*:\s*(?P<emotion>.+?)\s*$",
    re.IGNORECASE | re.DOTALL,
)

TRANSITION_FORMAT_REMINDER = (
    "Answer ONLY with the three labeled lines:\n"
    "Needs: ...\nAppraisal: ...\nEmotion: ..."
)


class UnparseableTransition(ValueError):
    """Predictor output lacked the three labeled fields."""

    def __init__(self, message: str, step_index: int = 1) -> None:
        super().__init__(message)
        self.step_index = step_index


@dataclass(frozen=True)
class UserTransition:
    """Predicted user-side state update: needs, appraisal, emotion."""

    needs: str
    appraisal: str
    emotion: str
    step_index: int = 1

    def __post_init__(self) -> None:
        if not (self.needs.strip() and self.appraisal.strip() and self.emotion.strip()):
            raise ValueError("all three transition fields must be non-empty")
        if self.step_index < 1:
            raise ValueError("step_index must be >= 1")

    def same_state(self, other: "UserTransition") -> bool:
        return (self.needs, self.appraisal, self.emotion) == (
            other.needs,
            other.appraisal,
            other.emotion,
        )

    def as_step_text(self) -> str:
        return f"Needs: {self.needs} | Appraisal: {self.appraisal} | Emotion: {self.emotion}"

    def as_rp_step(self) -> RpStep:
        return RpStep(index=self.step_index, text=self.as_step_text())

    def to_record(self) -> dict:
        return {
            "step": self.step_index,
            "needs": self.needs,
            "appraisal": self.appraisal,
            "emotion": self.emotion,
        }


def parse_transition(text: str, step_index: int = 1) -> UserTransition:
    """Extract the three labeled fields from predictor text (or a step payload)."""
    m = _TRANSITION_RE.search(text)
    if m is None:
        raise UnparseableTransition(
            f"predictor output lacks Needs/Appraisal/Emotion fields: {text!r}", step_index
        )
    return UserTransition(
        needs=m.group("needs").strip(),
        appraisal=m.group("appraisal").strip(),
        emotion=m.group("emotion").strip(),
        step_index=step_index,
    )


@dataclass(frozen=True)
class RpConfig:
    """Lookahead depth and the early-stop rule (stop once the prediction repeats)."""

    depth: int = 3
    early_stop: bool = True
    max_depth: int = 10

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 1 <= self.depth <= self.max_depth:
            raise ValueError(f"depth must be in 1..{self.max_depth}, got {self.depth}")


@dataclass(frozen=True)
class LookaheadResult:
    final: UserTransition
    steps: tuple[UserTransition, ...]


def _predictor_messages(
    context: str, response: str, prev: UserTransition | None
) -> list[ChatMessage]:
    if prev is None:
        body = render_prompt(TRANSITION_FIRST, {"context": context, "response": response})
    else:
        body = render_prompt(
            TRANSITION_NEXT,
            {
                "context": context,
                "response": response,
                "prev_step": prev.step_index,
                "prev_needs": prev.needs,
                "prev_appraisal": prev.appraisal,
                "prev_emotion": prev.emotion,
            },
        )
    return [ChatMessage("user", body)]


def predict_transition(
    context: str,
    response: str,
    prev: UserTransition | None,
    predictor: Agent,
    params: SamplingParams,
) -> UserTransition:
    """One lookahead step; retries once with a format reminder before failing."""
    step_index = 1 if prev is None else prev.step_index + 1
    messages = _predictor_messages(context, response, prev)
    text = predictor.complete(messages, params)
    try:
        return parse_transition(text, step_index)
    except UnparseableTransition:
        retry = list(messages) + [
            ChatMessage("assistant", text),
            ChatMessage("user", TRANSITION_FORMAT_REMINDER),
        ]
        return parse_transition(predictor.complete(retry, params), step_index)


def rollout(
    context: str,
    response: str,
    config: RpConfig,
    predictor: Agent,
    params: SamplingParams,
) -> LookaheadResult:
    """Iterate the predictor to config.depth, honoring early stop on a stable state."""
    steps: list[UserTransition] = []
    prev: UserTransition | None = None
    for _ in range(config.depth):
        step = predict_transition(context, response, prev, predictor, params)
        if config.early_stop and prev is not None and step.same_state(prev):
            break
        steps.append(step)
        prev = step
    assert steps, "depth >= 1 guarantees at least one step"
    return LookaheadResult(final=steps[-1], steps=tuple(steps))


def score_rp(
    final: UserTransition,
    context: str,
    response: str,
    judge: Agent,
    params: SamplingParams,
) -> tuple[float, str | None]:
    """Judge the final predicted transition; 1-5 mapped affinely to [0, 1].

    A judge failure scores 0.0 and is flagged rather than raised.
    """
    body = render_prompt(
        TRANSITION_JUDGE,
        {
            "context": context,
            "response": response,
            "needs": final.needs,
            "appraisal": final.appraisal,
            "emotion": final.emotion,
        },
    )
    score, flag = elicit_scale(judge, [ChatMessage("user", body)], params)
    if flag is not None:
        return 0.0, flag
    return (score - 1.0) / 4.0, None
