"""Prompt templates: placeholder substitution and pinned wire phrasings."""

import pytest

from appraisal_rl.prompts import (
    ROLLOUT_PLAIN,
    ROLLOUT_WITH_SCAFFOLD,
    TEMPLATES,
    TURN_JUDGE,
    EMOTION_JUDGE,
    USER_SIMULATOR,
    UnboundPlaceholder,
    render_prompt,
)


def test_simulator_turn_phrase():
    text = render_prompt(
        USER_SIMULATOR, {"scenario": "You support a stressed student.", "turn_number": 3, "max_turns": 8}
    )
    assert "You are on turn 3 of up to 8 turns" in text
    assert "Respond ONLY as the user character" in text


def test_scaffold_lookahead_phrase():
    text = render_prompt(
        ROLLOUT_WITH_SCAFFOLD,
        {"dialogue_history": "(No previous conversation)", "current_user_message": "help", "rp_k_steps": 3},
    )
    assert "Use up to K=3 reverse-perspective steps" in text
    assert "[Chosen Strategy Based on Reverse-Perspective Steps]" in text


def test_missing_binding_raises():
    with pytest.raises(UnboundPlaceholder, match="scenario"):
        render_prompt(USER_SIMULATOR, {"turn_number": 1, "max_turns": 8})


def test_literal_tags_survive_substitution():
    text = render_prompt(
        ROLLOUT_WITH_SCAFFOLD,
        {"dialogue_history": "h", "current_user_message": "m", "rp_k_steps": 2},
    )
    assert "<think>" in text and "</think>" in text
    assert "<response>" in text and "</response>" in text
    text = render_prompt(ROLLOUT_PLAIN, {"dialogue_history": "h", "current_user_message": "m"})
    assert "Do NOT output <think>" in text


def test_no_declared_placeholder_left_unresolved():
    for template in TEMPLATES.values():
        bindings = {name: f"VALUE_{name}" for name in template.required}
        text = render_prompt(template, bindings)
        for name in template.required:
            assert f"<{name}>" not in text
            assert f"VALUE_{name}" in text


def test_judge_prompt_wordings_are_pinned():
    turn = render_prompt(
        TURN_JUDGE,
        {"scenario": "s", "recent_context": "c", "assistant_response": "a", "user_followup": "u"},
    )
    assert "1 if this turn achieves satisfactory emotional resolution" in turn
    emotion = render_prompt(EMOTION_JUDGE, {"context": "c", "user_text": "t"})
    assert "Return ONLY one number in [1, 5]" in emotion
