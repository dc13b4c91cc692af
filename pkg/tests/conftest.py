"""Shared fixtures: trace generators, scripted agents, synthetic episodes."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from appraisal_rl.agents import AgentRole, CallableAgent
from appraisal_rl.environment import Termination, TerminationReason, Trajectory, Turn
from appraisal_rl.judging import JudgeTurn
from appraisal_rl.scenarios import ScenarioSeed
from appraisal_rl.trace import AppraisalState, ReasoningTrace, RpStep

FIXTURE_DIR = Path(__file__).parent / "fixtures"

GOOD_FIXTURES = (
    "training_trace_full.txt",
    "training_trace_revised.txt",
    "stage1_optional_labels.txt",
    "response_only_1.txt",
    "response_only_2.txt",
    "response_only_3.txt",
)

BAD_FIXTURES = {
    "bad_out_of_order.txt": "SectionOrderViolation",
    "bad_missing_section.txt": "IncompleteState",
    "bad_missing_response.txt": "MissingResponse",
    "bad_unknown_section.txt": "UnknownSection",
}

_WORDS = (
    "deadline", "pressure", "support", "plan", "focus", "rest", "draft",
    "manager", "review", "step", "relief", "worry", "control", "goal",
)


@pytest.fixture
def fixture_text():
    def load(name: str) -> str:
        return (FIXTURE_DIR / name).read_text(encoding="utf-8")

    return load


def random_payload(rng: random.Random, max_words: int = 6) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, max_words)))


def random_trace(rng: random.Random, max_steps: int = 6) -> ReasoningTrace:
    """A random well-formed trace for round-trip property tests."""
    if rng.random() < 0.25:
        return ReasoningTrace(response=random_payload(rng))
    steps = tuple(
        RpStep(index=i, text=random_payload(rng))
        for i in range(1, rng.randint(0, max_steps) + 1)
    )
    revision = random_payload(rng) if steps and rng.random() < 0.5 else None
    state = AppraisalState(*(random_payload(rng) for _ in range(5)))
    return ReasoningTrace(
        response=random_payload(rng),
        gate=1,
        state=state,
        rp_steps=steps,
        strategy_revision=revision,
    )


def make_seed(seed_id: str = "seed-1") -> ScenarioSeed:
    return ScenarioSeed(
        id=seed_id,
        dataset="ED",
        scenario=(
            "You are an empathetic companion supporting someone who feels "
            "emotionally overloaded and drained."
        ),
        initial_prompt="Everything feels piled up at once, and I cannot keep up anymore.",
    )


def rubric_judge(
    turn_record: str = '{"sr_proxy": 0, "ea": 4, "fa": 1, "query_simple": 0}',
    emotion: str = "3",
    cognitive: str = "4",
    trace_quality: str = "4",
    strategy_fit: str = "3",
    transition: str = "4",
) -> CallableAgent:
    """Deterministic judge keyed off distinctive template phrases, so it is
    insensitive to call order."""

    def respond(messages) -> str:
        body = messages[-1].content if messages[-1].role == "user" else messages[0].content
        if "Rate with conservative judgment" in body:
            return turn_record
        if "Analyze the emotional state" in body:
            return emotion
        if "Evaluate the cognitive reliability" in body:
            return cognitive
        if "Evaluate the structured reasoning trace" in body:
            return trace_quality
        if "Evaluate the implicit response strategy" in body:
            return strategy_fit
        if "Evaluate a predicted user-side transition" in body:
            return transition
        raise AssertionError(f"judge got an unrecognized prompt: {body[:80]!r}")

    return CallableAgent(AgentRole.JUDGE, respond)


def echo_predictor(suffix: str = "") -> CallableAgent:
    def respond(messages) -> str:
        return (
            f"Needs: steadier footing{suffix}\n"
            f"Appraisal: the plan feels manageable{suffix}\n"
            f"Emotion: cautious relief{suffix}"
        )

    return CallableAgent(AgentRole.TRANSITION_PREDICTOR, respond)


GOLDEN_SEED_RECORD = {
    "id": "golden-1",
    "dataset": "ED",
    "scenario": (
        "You are an empathetic companion supporting someone who feels "
        "emotionally overloaded and drained."
    ),
    "initial_prompt": "Everything feels piled up at once, and I cannot keep up anymore.",
}

# Judge scores chosen so the two turn rewards come out at 1.9 and 1.5 under
# unit weights, and the emotional gain at 2.0 (score 2 -> 4).
GOLDEN_RUN_JUDGE_LINES = [
    "2",
    '{"sr_proxy": 0, "ea": 4, "fa": 1, "query_simple": 0}',
    "3",
    '{"sr_proxy": 1, "ea": 5, "fa": 1, "query_simple": 0}',
    "4",
]
GOLDEN_SCORE_JUDGE_LINES = ["4.2", "2.6", "3.4", "3.4", "1", "2.6"]


def golden_policy_lines() -> list[str]:
    from appraisal_rl.trace import render_trace

    gated = ReasoningTrace(
        response="Open the revision request and pick the single most important change first.",
        gate=1,
        state=AppraisalState(
            facts="deadline tomorrow; another revision requested tonight",
            needs="regain control; reduce immediate stress",
            appraisal="high pressure and low perceived coping capacity",
            emotion="overwhelm and anxiety",
            strategy="stabilize first, then one concrete step",
        ),
        rp_steps=tuple(RpStep(i, f"hypothesis {i} about the user-side reaction") for i in range(1, 8)),
    )
    bare = "<response>\nYou have already named the main change; one rough draft tonight is enough.\n</response>"
    return [render_trace(gated), bare]


def golden_expected_reward() -> float:
    """The hand recomputation the golden episode must reproduce exactly."""
    t1 = (4.2 - 1) / 4 + (1.0 + (2.6 - 1) / 4) / 2 + (3.4 - 1) / 4 - 0.5 * (7 - 5) / 5
    t2 = (3.4 - 1) / 4 + (1.0 + 0.0) / 2 + (2.6 - 1) / 4 - 0.0
    return t1 + t2 + 1.0 * (4.0 - 2.0)


def golden_config_dicts() -> tuple[dict, dict]:
    """(run-episodes config, score config) with scripted agents."""
    base = {
        "weights": {"cog": 1.0, "arg": 1.0, "rp": 1.0, "overthink": 1.0, "emo": 1.0},
        "env": {"max_turns": 8, "group_size": 1, "rp_depth": 5},
        "rp": {"depth": 5, "early_stop": True},
    }
    run_config = dict(base)
    run_config["agents"] = {
        "policy": {"kind": "scripted", "lines": golden_policy_lines()},
        "simulator": {
            "kind": "scripted",
            "lines": ["I will try the first change now.", "Thanks, that's all I needed."],
        },
        "judge": {"kind": "scripted", "lines": GOLDEN_RUN_JUDGE_LINES},
    }
    score_config = dict(base)
    score_config["agents"] = {
        "judge": {"kind": "scripted", "lines": GOLDEN_SCORE_JUDGE_LINES},
        "predictor": {
            "kind": "scripted",
            "cycle": True,
            "lines": [
                "Needs: calmer focus\nAppraisal: the task feels smaller\nEmotion: relief building"
            ],
        },
    }
    return run_config, score_config


def write_golden_files(directory) -> dict:
    """Write seeds + the two configs into `directory`; returns the paths."""
    import json

    seeds = directory / "seeds.jsonl"
    seeds.write_text(json.dumps(GOLDEN_SEED_RECORD) + "\n", encoding="utf-8")
    run_config, score_config = golden_config_dicts()
    run_path = directory / "run_config.json"
    score_path = directory / "score_config.json"
    run_path.write_text(json.dumps(run_config, indent=2), encoding="utf-8")
    score_path.write_text(json.dumps(score_config, indent=2), encoding="utf-8")
    return {"seeds": str(seeds), "run_config": str(run_path), "score_config": str(score_path)}


def synthetic_trajectory(rng: random.Random, index: int) -> Trajectory:
    """A random completed episode with known judge signals, for metric oracles."""
    n_turns = rng.randint(1, 8)
    success_at = rng.choice([None, rng.randint(1, n_turns)])
    initial = float(rng.randint(1, 5))
    turns = []
    last_emotion = initial
    for t in range(1, n_turns + 1):
        last_emotion = float(rng.randint(1, 5))
        turns.append(
            Turn(
                index=t,
                context=f"User: synthetic context {index}.{t}",
                trace=ReasoningTrace(response=f"reply {index}.{t}"),
                user_reply=f"user says {index}.{t}",
                judge_turn=JudgeTurn(
                    sr_proxy=1 if (success_at is not None and t >= success_at) else 0,
                    ea=float(rng.randint(1, 5)),
                    fa=rng.randint(0, 1),
                    query_simple=rng.randint(0, 1),
                ),
                emotion_after=last_emotion,
            )
        )
    reason = (
        TerminationReason.TURN_LIMIT if n_turns == 8 else TerminationReason.END_INDICATOR
    )
    return Trajectory(
        seed=make_seed(f"synthetic-{index}"),
        turns=turns,
        termination=Termination(reason, at_turn=n_turns),
        initial_emotion=initial,
        final_emotion=last_emotion,
        trajectory_id=f"synthetic-{index}#0",
        group_id=f"synthetic-{index}",
    )
