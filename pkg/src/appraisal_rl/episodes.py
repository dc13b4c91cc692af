"""Episode file I/O: one trajectory per line, stable key order.

Records are plain JSON with keys emitted in a fixed construction order and
no timestamps, so identical runs produce byte-identical files. The same
records are consumed by the scoring pass, the batch exporter, and the
metrics reporting.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Iterator

from .environment import Termination, TerminationReason, Trajectory, Turn
from .judging import JudgeTurn
from .lookahead import UserTransition
from .rewards import TurnRewards
from .scenarios import seed_from_record
from .trace import AppraisalState, ReasoningTrace, RpStep


def trace_to_record(trace: ReasoningTrace) -> dict:
    return {
        "gate": trace.gate,
        "state": (
            {
                "facts": trace.state.facts,
                "needs": trace.state.needs,
                "appraisal": trace.state.appraisal,
                "emotion": trace.state.emotion,
                "strategy": trace.state.strategy,
            }
            if trace.state is not None
            else None
        ),
        "rp_steps": [{"index": step.index, "text": step.text} for step in trace.rp_steps],
        "strategy_revision": trace.strategy_revision,
        "response": trace.response,
    }


def trace_from_record(record: dict) -> ReasoningTrace:
    state = record.get("state")
    return ReasoningTrace(
        response=record["response"],
        gate=record["gate"],
        state=AppraisalState(**state) if state is not None else None,
        rp_steps=tuple(RpStep(index=s["index"], text=s["text"]) for s in record["rp_steps"]),
        strategy_revision=record.get("strategy_revision"),
    )


def turn_to_record(turn: Turn) -> dict:
    return {
        "index": turn.index,
        "context": turn.context,
        "trace": trace_to_record(turn.trace),
        "user_reply": turn.user_reply,
        "judge_turn": turn.judge_turn.to_record() if turn.judge_turn is not None else None,
        "emotion_after": turn.emotion_after,
        "rewards": turn.rewards.to_record() if turn.rewards is not None else None,
        "lookahead": (
            [step.to_record() for step in turn.lookahead] if turn.lookahead is not None else None
        ),
        "flags": list(turn.flags),
    }


def turn_from_record(record: dict) -> Turn:
    judge_turn = record.get("judge_turn")
    rewards = record.get("rewards")
    lookahead = record.get("lookahead")
    return Turn(
        index=record["index"],
        context=record["context"],
        trace=trace_from_record(record["trace"]),
        user_reply=record["user_reply"],
        judge_turn=JudgeTurn(**judge_turn) if judge_turn is not None else None,
        emotion_after=record.get("emotion_after"),
        rewards=TurnRewards(**rewards) if rewards is not None else None,
        lookahead=(
            tuple(
                UserTransition(
                    needs=s["needs"],
                    appraisal=s["appraisal"],
                    emotion=s["emotion"],
                    step_index=s["step"],
                )
                for s in lookahead
            )
            if lookahead is not None
            else None
        ),
        flags=tuple(record.get("flags", ())),
    )


def trajectory_to_record(trajectory: Trajectory) -> dict:
    return {
        "trajectory_id": trajectory.trajectory_id,
        "group_id": trajectory.group_id,
        "seed": trajectory.seed.to_record(),
        "turns": [turn_to_record(turn) for turn in trajectory.turns],
        "termination": trajectory.termination.to_record(),
        "initial_emotion": trajectory.initial_emotion,
        "final_emotion": trajectory.final_emotion,
        "reward": trajectory.reward,
        "flags": list(trajectory.flags),
        "scored_by": trajectory.scored_by,
    }


def trajectory_from_record(record: dict) -> Trajectory:
    termination = record["termination"]
    return Trajectory(
        seed=seed_from_record(record["seed"]),
        turns=[turn_from_record(t) for t in record["turns"]],
        termination=Termination(
            reason=TerminationReason(termination["reason"]),
            at_turn=termination["at_turn"],
            detail=termination.get("detail"),
        ),
        initial_emotion=record["initial_emotion"],
        final_emotion=record["final_emotion"],
        reward=record.get("reward"),
        trajectory_id=record.get("trajectory_id"),
        group_id=record.get("group_id"),
        flags=tuple(record.get("flags", ())),
        scored_by=record.get("scored_by"),
    )


def dump_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def write_episodes(path: str, trajectories: Iterable[Trajectory]) -> int:
    """Write trajectories one per line; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for trajectory in trajectories:
            handle.write(dump_line(trajectory_to_record(trajectory)))
            handle.write("\n")
            count += 1
    return count


def write_episodes_atomic(path: str, trajectories: Iterable[Trajectory]) -> int:
    """Write via a temp file and rename, for in-place enrichment."""
    tmp = f"{path}.tmp"
    count = write_episodes(tmp, trajectories)
    os.replace(tmp, path)
    return count


def read_episodes(path: str) -> Iterator[Trajectory]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield trajectory_from_record(json.loads(line))


def load_episodes(path: str) -> list[Trajectory]:
    return list(read_episodes(path))
