"""Judge output parsing and the strict-with-one-retry elicitation policy.

Two judge output shapes exist: a bare 1-5 number (emotional state and all
rubric scores) and a small JSON record for turn-level quality. Parsing is
strict; when a judge answer fails to parse, the gateway retries once with a
schema reminder appended, and a second failure falls back to the scale
minimum with a flag so the failure stays visible in the episode record.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .agents import Agent, AgentError, ChatMessage, SamplingParams

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")

TURN_SCHEMA_REMINDER = (
    "Return ONLY the JSON object with keys sr_proxy, ea, fa, query_simple. No other text."
)
SCALE_REMINDER = "Return ONLY one number in [1, 5]. No other text."


class JudgeError(ValueError):
    """Base class for judge-output errors."""


class UnparseableJudgeOutput(JudgeError):
    """Judge text did not contain the expected structure."""


class OutOfRange(JudgeError):
    """Judge value parsed but violates its declared range."""


class JudgeFailure(AgentError):
    """Judge output stayed unparseable after the retry."""


@dataclass(frozen=True)
class JudgeTurn:
    """Turn-level quality record: resolution flag, appropriateness, factuality."""

    sr_proxy: int
    ea: float
    fa: int
    query_simple: int | None = None

    def to_record(self) -> dict:
        return {
            "sr_proxy": self.sr_proxy,
            "ea": self.ea,
            "fa": self.fa,
            "query_simple": self.query_simple,
        }


MINIMUM_TURN = JudgeTurn(sr_proxy=0, ea=1.0, fa=0, query_simple=0)
MINIMUM_SCALE = 1.0


def _extract_json_object(text: str) -> dict:
    candidate = text.strip()
    try:
        obj = json.loads(candidate)
        if isinstance(obj, dict):
            return obj
    except json.JSONDecodeError:
        pass
    start = candidate.find("{")
    end = candidate.rfind("}")
    if start != -1 and end > start:
        try:
            obj = json.loads(candidate[start : end + 1])
            if isinstance(obj, dict):
                return obj
        except json.JSONDecodeError:
            pass
    raise UnparseableJudgeOutput(f"no JSON object in judge output: {text!r}")


def _binary(record: dict, key: str) -> int:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnparseableJudgeOutput(f"{key} must be a number, got {value!r}")
    if float(value) not in (0.0, 1.0):
        raise OutOfRange(f"{key} must be 0 or 1, got {value!r}")
    return int(value)


def parse_judge_turn(text: str) -> JudgeTurn:
    """Parse the turn-level judge record; rejects missing keys and bad ranges."""
    record = _extract_json_object(text)
    for key in ("sr_proxy", "ea", "fa"):
        if key not in record:
            raise UnparseableJudgeOutput(f"judge record missing key {key!r}")
    sr_proxy = _binary(record, "sr_proxy")
    fa = _binary(record, "fa")
    ea = record["ea"]
    if isinstance(ea, bool) or not isinstance(ea, (int, float)):
        raise UnparseableJudgeOutput(f"ea must be a number, got {ea!r}")
    ea = float(ea)
    if not 1.0 <= ea <= 5.0:
        raise OutOfRange(f"ea must be in [1, 5], got {ea!r}")
    query_simple = _binary(record, "query_simple") if "query_simple" in record else None
    return JudgeTurn(sr_proxy=sr_proxy, ea=ea, fa=fa, query_simple=query_simple)


def parse_judge_emotion(text: str) -> float:
    """Parse a single 1-5 score; out-of-range values are errors, never clamped."""
    numbers = _NUMBER_RE.findall(text)
    if len(numbers) != 1:
        raise UnparseableJudgeOutput(
            f"expected exactly one number in judge output, got {len(numbers)}: {text!r}"
        )
    value = float(numbers[0])
    if not 1.0 <= value <= 5.0:
        raise OutOfRange(f"judge score must be in [1, 5], got {value}")
    return value


def render_judge_turn(record: JudgeTurn) -> str:
    """Canonical text form of a turn record (used by scripted judges)."""
    payload = {"sr_proxy": record.sr_proxy, "ea": record.ea, "fa": record.fa}
    if record.query_simple is not None:
        payload["query_simple"] = record.query_simple
    return json.dumps(payload)


def elicit(
    judge: Agent,
    messages: Sequence[ChatMessage],
    params: SamplingParams,
    parser: Callable[[str], object],
    reminder: str,
):
    """Query the judge; on a parse failure, retry once with the reminder appended."""
    text = judge.complete(messages, params)
    try:
        return parser(text)
    except JudgeError as first_error:
        retry_messages = list(messages) + [
            ChatMessage("assistant", text),
            ChatMessage("user", reminder),
        ]
        retry_text = judge.complete(retry_messages, params)
        try:
            return parser(retry_text)
        except JudgeError as second_error:
            raise JudgeFailure(
                f"judge output unparseable after retry: {first_error}; then: {second_error}"
            ) from second_error


def elicit_scale(
    judge: Agent,
    messages: Sequence[ChatMessage],
    params: SamplingParams,
) -> tuple[float, str | None]:
    """1-5 score with the minimum-on-failure policy. Returns (score, flag)."""
    try:
        return elicit(judge, messages, params, parse_judge_emotion, SCALE_REMINDER), None
    except JudgeFailure as err:
        return MINIMUM_SCALE, str(err)


def elicit_turn(
    judge: Agent,
    messages: Sequence[ChatMessage],
    params: SamplingParams,
) -> tuple[JudgeTurn, str | None]:
    """Turn record with the minimum-on-failure policy. Returns (record, flag)."""
    try:
        return elicit(judge, messages, params, parse_judge_turn, TURN_SCHEMA_REMINDER), None
    except JudgeFailure as err:
        return MINIMUM_TURN, str(err)
