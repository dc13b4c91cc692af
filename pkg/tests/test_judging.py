"""Judge output parsing and the strict-with-one-retry elicitation policy."""

import pytest

from appraisal_rl.agents import AgentRole, ChatMessage, SamplingParams, ScriptedAgent
from appraisal_rl.judging import (
    MINIMUM_TURN,
    JudgeFailure,
    JudgeTurn,
    OutOfRange,
    UnparseableJudgeOutput,
    elicit,
    elicit_scale,
    elicit_turn,
    parse_judge_emotion,
    parse_judge_turn,
    render_judge_turn,
)

PARAMS = SamplingParams()
MESSAGES = [ChatMessage("user", "judge this")]


class TestParseTurn:
    def test_basic_record(self):
        record = parse_judge_turn('{"sr_proxy":1,"ea":4,"fa":1}')
        assert (record.sr_proxy, record.ea, record.fa) == (1, 4.0, 1)
        assert record.query_simple is None

    def test_fractional_ea(self):
        record = parse_judge_turn('{"sr_proxy":0,"ea":2.5,"fa":0}')
        assert record == JudgeTurn(0, 2.5, 0)

    def test_query_simple_accepted(self):
        record = parse_judge_turn('{"sr_proxy":0,"ea":3,"fa":1,"query_simple":1}')
        assert record.query_simple == 1

    def test_sr_proxy_must_be_binary(self):
        with pytest.raises(OutOfRange):
            parse_judge_turn('{"sr_proxy":2,"ea":3,"fa":1}')

    def test_ea_range(self):
        with pytest.raises(OutOfRange):
            parse_judge_turn('{"sr_proxy":0,"ea":5.5,"fa":1}')

    def test_missing_key(self):
        with pytest.raises(UnparseableJudgeOutput):
            parse_judge_turn('{"sr_proxy":0,"ea":3}')

    def test_json_embedded_in_prose(self):
        record = parse_judge_turn('Here you go:\n{"sr_proxy":1,"ea":4,"fa":1}\nDone.')
        assert record.sr_proxy == 1

    def test_non_numeric_rejected(self):
        with pytest.raises(UnparseableJudgeOutput):
            parse_judge_turn('{"sr_proxy":"yes","ea":3,"fa":1}')

    def test_render_parse_identity(self):
        for record in (JudgeTurn(1, 4.0, 1), JudgeTurn(0, 2.5, 0, query_simple=1)):
            assert parse_judge_turn(render_judge_turn(record)) == record


class TestParseEmotion:
    @pytest.mark.parametrize("text,value", [("5", 5.0), ("3", 3.0), (" 4.5 \n", 4.5)])
    def test_accepts_single_numbers(self, text, value):
        assert parse_judge_emotion(text) == value

    def test_number_inside_prose(self):
        assert parse_judge_emotion("Score: 4.") == 4.0

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            parse_judge_emotion("0.5")

    def test_two_numbers_ambiguous(self):
        with pytest.raises(UnparseableJudgeOutput):
            parse_judge_emotion("between 3 and 4")

    def test_no_number(self):
        with pytest.raises(UnparseableJudgeOutput):
            parse_judge_emotion("pretty good")


class TestElicit:
    def test_retry_appends_reminder_and_recovers(self):
        judge = ScriptedAgent(AgentRole.JUDGE, ["hmm, maybe four?", "4"])
        value = elicit(judge, MESSAGES, PARAMS, parse_judge_emotion, "Return ONLY one number.")
        assert value == 4.0
        assert judge.calls == 2

    def test_double_failure_raises(self):
        judge = ScriptedAgent(AgentRole.JUDGE, ["nope", "still nope"])
        with pytest.raises(JudgeFailure):
            elicit(judge, MESSAGES, PARAMS, parse_judge_emotion, "Return ONLY one number.")

    def test_scale_minimum_fallback(self):
        judge = ScriptedAgent(AgentRole.JUDGE, ["nope", "still nope"])
        value, flag = elicit_scale(judge, MESSAGES, PARAMS)
        assert value == 1.0 and flag is not None

    def test_turn_minimum_fallback(self):
        judge = ScriptedAgent(AgentRole.JUDGE, ["nope", "still nope"])
        record, flag = elicit_turn(judge, MESSAGES, PARAMS)
        assert record == MINIMUM_TURN and flag is not None

    def test_reminder_is_visible_to_the_judge(self):
        seen = []

        def respond(messages):
            seen.append(messages[-1].content)
            return "junk" if len(seen) == 1 else "3"

        from appraisal_rl.agents import CallableAgent

        judge = CallableAgent(AgentRole.JUDGE, respond)
        value, flag = elicit_scale(judge, MESSAGES, PARAMS)
        assert value == 3.0 and flag is None
        assert "Return ONLY one number in [1, 5]" in seen[1]
