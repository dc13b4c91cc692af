"""Multi-turn role-play environment.

Runs episodes from a scenario seed: the policy and the user simulator
alternate, a judge scores the user's emotional state and each turn's
quality, and the episode halts on the turn limit or an end-of-conversation
indicator in the user's reply. Think-block text never enters the dialogue
context passed forward; only response text does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .agents import AgentError, AgentSet, ChatMessage, SamplingParams
from .judging import JudgeTurn, elicit_scale, elicit_turn
from .lookahead import UserTransition
from .prompts import (
    EMOTION_JUDGE,
    NO_HISTORY,
    ROLLOUT_PLAIN,
    ROLLOUT_WITH_SCAFFOLD,
    TURN_JUDGE,
    USER_SIMULATOR,
    render_prompt,
)
from .rewards import TurnRewards
from .scenarios import ScenarioSeed
from .trace import DEFAULT_SCHEMA, ReasoningTrace, TraceSchema, parse_trace_lenient

# The exact end-of-conversation indicator phrases, matched case-insensitively
# as substrings of the latest user reply.
DEFAULT_END_INDICATORS: tuple[str, ...] = (
    "thank you",
    "thanks",
    "goodbye",
    "bye",
    "that's all",
    "that's enough",
    "i'm done",
    "no more questions",
    "i understand now",
)


class RolloutMode(str, Enum):
    WITH_SCAFFOLD = "scaffold"
    NO_SCAFFOLD = "plain"


class TerminationReason(str, Enum):
    TURN_LIMIT = "turn_limit"
    END_INDICATOR = "end_indicator"
    ABORT = "abort"


@dataclass(frozen=True)
class Termination:
    reason: TerminationReason
    at_turn: int
    detail: str | None = None

    def to_record(self) -> dict:
        return {"reason": self.reason.value, "at_turn": self.at_turn, "detail": self.detail}


@dataclass(frozen=True)
class EnvConfig:
    max_turns: int = 8
    group_size: int = 4
    rp_depth: int = 3
    end_indicators: tuple[str, ...] = DEFAULT_END_INDICATORS
    sampling: SamplingParams = field(default_factory=SamplingParams)

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.rp_depth < 0:
            raise ValueError("rp_depth must be >= 0")


@dataclass
class Turn:
    """One assistant turn with its pre-response context and post-turn signals."""

    index: int
    context: str
    trace: ReasoningTrace
    user_reply: str
    judge_turn: JudgeTurn | None = None
    emotion_after: float | None = None
    rewards: TurnRewards | None = None
    lookahead: tuple[UserTransition, ...] | None = None
    flags: tuple[str, ...] = ()


@dataclass
class Trajectory:
    """A complete (or abort-tagged partial) episode record."""

    seed: ScenarioSeed
    turns: list[Turn]
    termination: Termination
    initial_emotion: float
    final_emotion: float
    reward: float | None = None
    trajectory_id: str | None = None
    group_id: str | None = None
    flags: tuple[str, ...] = ()
    scored_by: dict[str, str] | None = None


class EpisodeAborted(AgentError):
    """An agent failed mid-episode; the partial trajectory rides along."""

    def __init__(self, message: str, trajectory: Trajectory) -> None:
        super().__init__(message)
        self.trajectory = trajectory


def check_termination(
    latest_user_reply: str, turn_count: int, config: EnvConfig
) -> TerminationReason | None:
    """Termination decision after a user reply; None means the episode continues.

    The turn limit takes precedence; otherwise any configured indicator
    phrase, matched case-insensitively as a substring, ends the episode.
    """
    if turn_count >= config.max_turns:
        return TerminationReason.TURN_LIMIT
    lowered = latest_user_reply.lower()
    if any(indicator in lowered for indicator in config.end_indicators):
        return TerminationReason.END_INDICATOR
    return None


def render_history(history: list[tuple[str, str]]) -> str:
    return "\n".join(f"{speaker}: {text}" for speaker, text in history)


def _policy_messages(
    seed: ScenarioSeed,
    history: list[tuple[str, str]],
    mode: RolloutMode,
    config: EnvConfig,
) -> list[ChatMessage]:
    prior = render_history(history[:-1]) or NO_HISTORY
    current = history[-1][1]
    if mode is RolloutMode.WITH_SCAFFOLD:
        body = render_prompt(
            ROLLOUT_WITH_SCAFFOLD,
            {
                "dialogue_history": prior,
                "current_user_message": current,
                "rp_k_steps": config.rp_depth,
            },
        )
    else:
        body = render_prompt(
            ROLLOUT_PLAIN, {"dialogue_history": prior, "current_user_message": current}
        )
    return [ChatMessage("system", seed.scenario), ChatMessage("user", body)]


def _simulator_messages(
    seed: ScenarioSeed,
    history: list[tuple[str, str]],
    turn_number: int,
    config: EnvConfig,
) -> list[ChatMessage]:
    system = render_prompt(
        USER_SIMULATOR,
        {"scenario": seed.scenario, "turn_number": turn_number, "max_turns": config.max_turns},
    )
    body = f"Conversation so far:\n{render_history(history)}\n\nReply with the user's next utterance."
    return [ChatMessage("system", system), ChatMessage("user", body)]


def _emotion_messages(seed: ScenarioSeed, user_text: str) -> list[ChatMessage]:
    body = render_prompt(EMOTION_JUDGE, {"context": seed.scenario, "user_text": user_text})
    return [ChatMessage("user", body)]


def _turn_judge_messages(
    seed: ScenarioSeed, context: str, response: str, followup: str
) -> list[ChatMessage]:
    body = render_prompt(
        TURN_JUDGE,
        {
            "scenario": seed.scenario,
            "recent_context": context,
            "assistant_response": response,
            "user_followup": followup,
        },
    )
    return [ChatMessage("user", body)]


def run_episode(
    seed: ScenarioSeed,
    agents: AgentSet,
    config: EnvConfig,
    mode: RolloutMode = RolloutMode.WITH_SCAFFOLD,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> Trajectory:
    """Run one episode to termination and return the full trajectory.

    The initial emotional state is judged on the seed's opening utterance
    before turn 1; every simulator reply is judged afterwards, so the final
    emotion is always the last scored reply (or the initial score if the
    episode aborted before any turn completed). Agent failures raise
    EpisodeAborted carrying the abort-tagged partial trajectory.
    """
    policy = agents.policy
    if policy is None or agents.simulator is None or agents.judge is None:
        raise ValueError("run_episode needs policy, simulator, and judge agents")
    params = config.sampling
    history: list[tuple[str, str]] = [("User", seed.initial_prompt)]
    turns: list[Turn] = []
    trajectory_flags: list[str] = []

    def _partial(reason_detail: str, at_turn: int) -> Trajectory:
        final = initial_emotion
        if turns and turns[-1].emotion_after is not None:
            final = turns[-1].emotion_after
        return Trajectory(
            seed=seed,
            turns=turns,
            termination=Termination(TerminationReason.ABORT, at_turn, reason_detail),
            initial_emotion=initial_emotion,
            final_emotion=final,
            flags=tuple(trajectory_flags),
        )

    initial_emotion = 1.0
    try:
        initial_emotion, flag = elicit_scale(
            agents.judge, _emotion_messages(seed, seed.initial_prompt), params
        )
        if flag is not None:
            trajectory_flags.append(f"initial_emotion_judge: {flag}")
    except AgentError as err:
        raise EpisodeAborted(str(err), _partial(str(err), 0)) from err

    termination: Termination | None = None
    turn_index = 0
    try:
        for turn_index in range(1, config.max_turns + 1):
            context = render_history(history)
            raw = policy.complete(_policy_messages(seed, history, mode, config), params)
            trace, parse_error = parse_trace_lenient(raw, schema)
            turn_flags: list[str] = []
            if parse_error is not None:
                turn_flags.append(f"trace_parse: {type(parse_error).__name__}: {parse_error}")
            history.append(("Assistant", trace.response))

            reply = agents.simulator.complete(
                _simulator_messages(seed, history, turn_index, config), params
            )
            history.append(("User", reply))

            judge_turn, flag = elicit_turn(
                agents.judge, _turn_judge_messages(seed, context, trace.response, reply), params
            )
            if flag is not None:
                turn_flags.append(f"turn_judge: {flag}")
            emotion_after, flag = elicit_scale(agents.judge, _emotion_messages(seed, reply), params)
            if flag is not None:
                turn_flags.append(f"emotion_judge: {flag}")

            turns.append(
                Turn(
                    index=turn_index,
                    context=context,
                    trace=trace,
                    user_reply=reply,
                    judge_turn=judge_turn,
                    emotion_after=emotion_after,
                    flags=tuple(turn_flags),
                )
            )
            reason = check_termination(reply, turn_index, config)
            if reason is not None:
                termination = Termination(reason, at_turn=turn_index)
                break
    except AgentError as err:
        raise EpisodeAborted(str(err), _partial(str(err), turn_index)) from err

    assert termination is not None, "the turn-limit rule always terminates the loop"
    final_emotion = turns[-1].emotion_after if turns else initial_emotion
    return Trajectory(
        seed=seed,
        turns=turns,
        termination=termination,
        initial_emotion=initial_emotion,
        final_emotion=final_emotion if final_emotion is not None else initial_emotion,
        flags=tuple(trajectory_flags),
    )


def run_group(
    seed: ScenarioSeed,
    agents: AgentSet,
    config: EnvConfig,
    mode: RolloutMode = RolloutMode.WITH_SCAFFOLD,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> list[Trajectory]:
    """Run group_size independent episodes from one seed, in stable order.

    A member that aborts stays in the group as its abort-tagged partial
    trajectory; siblings are unaffected.
    """
    members: list[Trajectory] = []
    for member in range(config.group_size):
        try:
            trajectory = run_episode(seed, agents, config, mode, schema)
        except EpisodeAborted as err:
            trajectory = err.trajectory
        trajectory.group_id = seed.id
        trajectory.trajectory_id = f"{seed.id}#{member}"
        members.append(trajectory)
    return members
