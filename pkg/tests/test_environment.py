"""Role-play environment: termination rules, episode runs, groups, determinism."""

import pytest

from appraisal_rl.agents import (
    AgentRole,
    AgentSet,
    CallableAgent,
    ScriptedAgent,
    TransportError,
)
from appraisal_rl.environment import (
    DEFAULT_END_INDICATORS,
    EnvConfig,
    EpisodeAborted,
    RolloutMode,
    TerminationReason,
    check_termination,
    run_episode,
    run_group,
)
from appraisal_rl.episodes import trajectory_to_record
from appraisal_rl.trace import AppraisalState, ReasoningTrace, render_trace

from conftest import make_seed, rubric_judge

GATED_TEXT = render_trace(
    ReasoningTrace(
        response="Let's pick the single most important change first.",
        gate=1,
        state=AppraisalState(
            facts="deadline tonight",
            needs="regain control",
            appraisal="high pressure",
            emotion="overwhelm",
            strategy="stabilize first",
        ),
    )
)
BARE_TEXT = "<response>\nOne step at a time.\n</response>"


def constant_policy(text=BARE_TEXT):
    return CallableAgent(AgentRole.POLICY, lambda msgs: text)


def neutral_simulator():
    return CallableAgent(
        AgentRole.USER_SIMULATOR, lambda msgs: "I am not sure yet, can we keep going?"
    )


def agent_set(policy=None, simulator=None, judge=None):
    return AgentSet(
        policy=policy or constant_policy(),
        simulator=simulator or neutral_simulator(),
        judge=judge or rubric_judge(),
    )


class TestTermination:
    def test_indicator_before_limit(self):
        assert (
            check_termination("Thanks, that's all I needed.", 3, EnvConfig())
            is TerminationReason.END_INDICATOR
        )

    def test_limit_reached(self):
        assert (
            check_termination("Can you explain more?", 8, EnvConfig())
            is TerminationReason.TURN_LIMIT
        )

    def test_continue(self):
        assert check_termination("Can you explain more?", 2, EnvConfig()) is None

    def test_limit_takes_precedence_over_indicator(self):
        assert (
            check_termination("thanks for everything", 8, EnvConfig())
            is TerminationReason.TURN_LIMIT
        )

    @pytest.mark.parametrize("phrase", DEFAULT_END_INDICATORS)
    def test_every_indicator_mid_sentence_mixed_case(self, phrase):
        reply = f"Well, {phrase.upper()}, I suppose we are finished here."
        assert check_termination(reply, 1, EnvConfig()) is TerminationReason.END_INDICATOR


class TestEpisode:
    def test_script_forced_end_indicator(self):
        simulator = ScriptedAgent(
            AgentRole.USER_SIMULATOR,
            ["It still feels like too much.", "Okay. Thanks, that's all I needed."],
        )
        trajectory = run_episode(
            make_seed(), agent_set(simulator=simulator), EnvConfig(), RolloutMode.NO_SCAFFOLD
        )
        assert len(trajectory.turns) == 2
        assert trajectory.termination.reason is TerminationReason.END_INDICATOR
        assert trajectory.termination.at_turn == 2

    def test_turn_limit_when_no_indicator_ever(self):
        trajectory = run_episode(make_seed(), agent_set(), EnvConfig(max_turns=5))
        assert len(trajectory.turns) == 5
        assert trajectory.termination.reason is TerminationReason.TURN_LIMIT

    def test_initial_emotion_scored_once_before_turns(self):
        emotion_calls = []

        def judge_fn(messages):
            body = messages[-1].content
            if "Analyze the emotional state" in body:
                emotion_calls.append(body)
                return "2" if len(emotion_calls) == 1 else "4"
            return '{"sr_proxy": 0, "ea": 3, "fa": 1, "query_simple": 0}'

        judge = CallableAgent(AgentRole.JUDGE, judge_fn)
        trajectory = run_episode(
            make_seed(), agent_set(judge=judge), EnvConfig(max_turns=3)
        )
        assert trajectory.initial_emotion == 2.0
        assert trajectory.final_emotion == 4.0
        # one initial call plus one per turn
        assert len(emotion_calls) == 1 + len(trajectory.turns)
        assert make_seed().initial_prompt in emotion_calls[0]

    def test_context_monotonic_and_free_of_think_text(self):
        trajectory = run_episode(
            make_seed(), agent_set(policy=constant_policy(GATED_TEXT)), EnvConfig(max_turns=4)
        )
        previous = ""
        for turn in trajectory.turns:
            assert turn.context.startswith(previous)
            assert len(turn.context) > len(previous)
            assert "<think>" not in turn.context
            assert "[Contextual Facts]" not in turn.context
            previous = turn.context
        assert trajectory.turns[1].context.endswith("I am not sure yet, can we keep going?")

    def test_lenient_parse_flags_malformed_policy_output(self):
        policy = constant_policy("<think>\n[Appraisal] only\n</think>\n<response>\nok\n</response>")
        trajectory = run_episode(
            make_seed(), agent_set(policy=policy), EnvConfig(max_turns=1)
        )
        turn = trajectory.turns[0]
        assert turn.trace.gate == 0
        assert turn.trace.response == "ok"
        assert any(flag.startswith("trace_parse:") for flag in turn.flags)

    def test_scripted_runs_are_bit_deterministic(self):
        def build():
            return agent_set(policy=constant_policy(GATED_TEXT))

        first = trajectory_to_record(run_episode(make_seed(), build(), EnvConfig(max_turns=4)))
        second = trajectory_to_record(run_episode(make_seed(), build(), EnvConfig(max_turns=4)))
        assert first == second

    def test_abort_preserves_partial_trajectory(self):
        calls = {"n": 0}

        def flaky(msgs):
            calls["n"] += 1
            if calls["n"] >= 2:
                raise TransportError("endpoint went away")
            return BARE_TEXT

        policy = CallableAgent(AgentRole.POLICY, flaky)
        with pytest.raises(EpisodeAborted) as err:
            run_episode(make_seed(), agent_set(policy=policy), EnvConfig(max_turns=4))
        partial = err.value.trajectory
        assert len(partial.turns) == 1
        assert partial.termination.reason is TerminationReason.ABORT
        assert partial.termination.at_turn == 2
        assert "endpoint went away" in partial.termination.detail


class TestGroup:
    def test_deterministic_agents_give_identical_members(self):
        trajectories = run_group(make_seed(), agent_set(), EnvConfig(max_turns=3, group_size=4))
        records = [trajectory_to_record(t) for t in trajectories]
        assert len(records) == 4
        assert [r["trajectory_id"] for r in records] == [
            "seed-1#0",
            "seed-1#1",
            "seed-1#2",
            "seed-1#3",
        ]
        stripped = [
            {k: v for k, v in r.items() if k != "trajectory_id"} for r in records
        ]
        assert all(s == stripped[0] for s in stripped)

    def test_singleton_group(self):
        trajectories = run_group(make_seed(), agent_set(), EnvConfig(max_turns=2, group_size=1))
        assert len(trajectories) == 1
        assert trajectories[0].group_id == "seed-1"

    def test_abort_does_not_cancel_siblings(self):
        calls = {"n": 0}

        def flaky(msgs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise TransportError("boom")
            return BARE_TEXT

        simulator = CallableAgent(
            AgentRole.USER_SIMULATOR, lambda msgs: "Thanks, that's all I needed."
        )
        agents = agent_set(
            policy=CallableAgent(AgentRole.POLICY, flaky), simulator=simulator
        )
        trajectories = run_group(make_seed(), agents, EnvConfig(max_turns=4, group_size=4))
        reasons = [t.termination.reason for t in trajectories]
        assert reasons.count(TerminationReason.ABORT) == 1
        assert reasons.count(TerminationReason.END_INDICATOR) == 3
