"""Prompt templates for the four model roles.

Placeholders use the <name> convention. Only names declared by a template
are substituted; literal tag text such as <think> and <response> inside a
body is left untouched. Template bodies are wire contracts: the simulator,
scaffold, and judge wordings are what scripted fixtures and live judges
see, so edit with care.
"""

from __future__ import annotations

from dataclasses import dataclass


class UnboundPlaceholder(ValueError):
    """A required placeholder had no binding at render time."""


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    required: frozenset[str]

    def __post_init__(self) -> None:
        for name in self.required:
            if f"<{name}>" not in self.body:
                raise ValueError(
                    f"template {self.template_id!r} declares <{name}> but the body lacks it"
                )


def render_prompt(template: PromptTemplate, bindings: dict[str, object]) -> str:
    """Substitute declared placeholders; fail on any missing required one."""
    missing = sorted(template.required - set(bindings))
    if missing:
        raise UnboundPlaceholder(
            f"template {template.template_id!r} missing binding(s): {', '.join(missing)}"
        )
    text = template.body
    for name in sorted(template.required):
        text = text.replace(f"<{name}>", str(bindings[name]))
    return text


NO_HISTORY = "(No previous conversation)"


ROLLOUT_WITH_SCAFFOLD = PromptTemplate(
    template_id="rollout_with_scaffold",
    required=frozenset({"dialogue_history", "current_user_message", "rp_k_steps"}),
    body="""Dialogue History:
<dialogue_history>

Current User Message:
<current_user_message>

Please respond in the following format.
Use up to K=<rp_k_steps> reverse-perspective steps.
You may stop early when the predicted user-side trajectory is already stable.
Keep <think> concise: each section should be 1-2 short lines.
Keep <response> concise and practical; typically 2-5 sentences unless more detail is needed.

<think>
[Contextual Facts] [Key contextual facts/events from the dialogue.]
[Inferred Needs and Goals] [The user's salient needs/goals.]
[Appraisal] [Evaluation of facts relative to needs (goal congruence, controllability, responsibility).]
[Emotional State] [Emotional state implied by the appraisal.]
[Response Strategy] [Response strategy conditioned on contextual facts, needs, appraisal, and emotion.]
[Reverse-Perspective Step 1] [Likely immediate user-side consequence of this candidate response.]
...
[Reverse-Perspective Step K] [Optional next-step user-side consequence hypothesis.]
[Chosen Strategy Based on Reverse-Perspective Steps] [Select or revise the response strategy after considering the predicted user-side consequences.]
</think>

<response>
[Your actual response]
</response>""",
)


ROLLOUT_PLAIN = PromptTemplate(
    template_id="rollout_plain",
    required=frozenset({"dialogue_history", "current_user_message"}),
    body="""Dialogue History:
<dialogue_history>

Current User Message:
<current_user_message>

Reply directly with the next assistant message in plain text.
Do NOT output <think>...</think>.""",
)


USER_SIMULATOR = PromptTemplate(
    template_id="user_simulator",
    required=frozenset({"scenario", "turn_number", "max_turns"}),
    body="""You are role-playing as the USER in the following scenario:
<scenario>

Instructions:
- Stay in character based on the scenario
- Respond naturally and conversationally
- Express emotions and reactions appropriate to the scenario
- Keep responses concise (1-3 sentences)
- You are on turn <turn_number> of up to <max_turns> turns
- You are the user in this interaction, NOT the assistant
- Do not switch roles or start solving the problem for the assistant
- If the conversation is reaching a natural conclusion, you may indicate that
- Use first-person user voice only

Respond ONLY as the user character, with no meta-commentary.
Output only the user's next utterance in plain text.""",
)


ANNOTATION_WITH_TRACE = PromptTemplate(
    template_id="annotation_with_trace",
    required=frozenset({"conversation_history", "current_user_message"}),
    body="""You are an empathetic and thoughtful conversational assistant.
Given a multi-turn conversation history and a current user message,
generate a structured appraisal reasoning trace and a response.

Conversation History:
<conversation_history>

Current User Message:
<current_user_message>

Please provide your answer in the following EXACT format.
The optional reverse-perspective sections should be included only when
they provide useful additional reasoning.

<think>
[Contextual Facts] [Briefly summarize key facts/events from the conversation.]
[Inferred Needs and Goals] [Infer the user's salient needs, goals, or concerns.]
[Appraisal] [Evaluate facts relative to needs/goals (e.g., goal congruence, controllability, responsibility).]
[Emotional State] [State the emotional state implied by the appraisal.]
[Response Strategy] [Select a response strategy conditioned on the previous sections. Include tone and concrete action focus.]
[Optional Reverse-Perspective Step 1] [Optional: likely immediate user-side reaction to this response.]
[Optional Reverse-Perspective Step 2] [Optional: next-step user reaction hypothesis.]
[Optional Reverse-Perspective Step 3] [Optional: next-step user reaction hypothesis.]
[Optional Strategy Revision Based on Reverse-Perspective Steps] [Optional: revise or confirm the strategy after considering rollout hypotheses.]
</think>

<response>
[Your actual response to the user -- natural, empathetic, and contextually appropriate]
</response>

IMPORTANT:
- Follow the EXACT section names and order shown above
- Keep each section specific and grounded in the dialogue context
- Do not invent unrelated facts
- The optional reverse-perspective sections are teacher-side augmentation
- The final response should be natural, empathetic, and actionable""",
)


ANNOTATION_RESPONSE_ONLY = PromptTemplate(
    template_id="annotation_response_only",
    required=frozenset({"conversation_history", "current_user_message"}),
    body="""You are an empathetic and concise conversational assistant.

Conversation History:
<conversation_history>

Current User Message:
<current_user_message>

For this sample, a structured reasoning trace is NOT required.
Please output ONLY this format:

<response>
[Your actual response to the user -- natural, empathetic, and contextually appropriate]
</response>

IMPORTANT:
- Do NOT output <think>...</think>
- Keep the response direct, supportive, and actionable
- Do not invent unrelated facts""",
)


EMOTION_JUDGE = PromptTemplate(
    template_id="emotion_judge",
    required=frozenset({"context", "user_text"}),
    body='''Analyze the emotional state expressed in the user text.

Context:
<context>

User text:
"""<user_text>"""

Return ONLY one number in [1, 5]:
1 = highly distressed, hopeless, or emotionally overwhelmed
2 = clearly negative or strained
3 = neutral or mixed
4 = mildly positive, reassured, or more settled
5 = clearly positive, relieved, or emotionally stabilized''',
)


TURN_JUDGE = PromptTemplate(
    template_id="turn_judge",
    required=frozenset({"scenario", "recent_context", "assistant_response", "user_followup"}),
    body='''Evaluate one assistant turn in an emotionally grounded multi-turn dialogue.

Scenario:
<scenario>

Recent context:
<recent_context>

Assistant response:
"""<assistant_response>"""

User follow-up:
"""<user_followup>"""

Rate with conservative judgment and return JSON only:
{
  "sr_proxy": number,      // binary: 1 if this turn achieves satisfactory emotional resolution, else 0
  "ea": number,            // 1~5, empathic appropriateness
  "fa": number,            // binary: 1 if factually reliable / grounded, else 0
  "query_simple": number   // binary: 1 if the user's message was simple enough for a direct reply, else 0
}

Rubric:
- sr_proxy: 1 only if the current turn already reaches a satisfactory emotional resolution under the scenario; otherwise 0.
- ea: warmth + validation + non-judgment + fit of support to the user's needs.
- fa: 1 if the response is factually reliable / grounded; otherwise 0.
- query_simple: 1 if a short direct reply would fully serve the user's message; otherwise 0.''',
)


COGNITIVE_JUDGE = PromptTemplate(
    template_id="cognitive_judge",
    required=frozenset({"context", "response"}),
    body='''Evaluate the cognitive reliability of one assistant response in a multi-turn dialogue.

Dialogue context:
<context>

Assistant response:
"""<response>"""

Judge whether the response is factually and logically consistent with the dialogue
context. Hallucinations, contradictions, and unsupported claims receive lower scores.

Return ONLY one number in [1, 5]:
1 = severe hallucination or contradiction
2 = noticeable unsupported claims
3 = mostly consistent, minor unsupported details
4 = consistent and grounded
5 = fully grounded and logically sound''',
)


TRACE_JUDGE = PromptTemplate(
    template_id="trace_judge",
    required=frozenset({"context", "trace_text", "response"}),
    body='''Evaluate the structured reasoning trace behind one assistant response.

Dialogue context:
<context>

Reasoning trace:
<trace_text>

Assistant response:
"""<response>"""

Judge whether the reasoning is well-formed and semantically coherent: grounded facts,
justified needs, plausible appraisals, emotion-appraisal consistency, and strategy
relevance. Unsupported inferences or internally inconsistent reasoning chains receive
lower scores.

Return ONLY one number in [1, 5].''',
)


STRATEGY_FIT_JUDGE = PromptTemplate(
    template_id="strategy_fit_judge",
    required=frozenset({"context", "response"}),
    body='''Evaluate the implicit response strategy of one assistant response.
No explicit reasoning trace was emitted for this turn.

Dialogue context:
<context>

Assistant response:
"""<response>"""

Judge whether the response reflects a contextually appropriate strategy for the
user's needs and emotional state.

Return ONLY one number in [1, 5].''',
)


TRANSITION_JUDGE = PromptTemplate(
    template_id="transition_judge",
    required=frozenset({"context", "response", "needs", "appraisal", "emotion"}),
    body='''Evaluate a predicted user-side transition caused by one assistant response.

Dialogue context:
<context>

Assistant response:
"""<response>"""

Predicted user-side transition:
Needs: <needs>
Appraisal: <appraisal>
Emotion: <emotion>

Score the prediction on:
(i) contextual consistency with the dialogue context;
(ii) psychological plausibility of the inferred needs, appraisals, and emotional state;
(iii) consistency between the predicted user-side consequence and the selected response strategy.

Return ONLY one number in [1, 5].''',
)


TRANSITION_FIRST = PromptTemplate(
    template_id="transition_first",
    required=frozenset({"context", "response"}),
    body='''You are reasoning from the user's perspective.

Dialogue context:
<context>

The assistant is about to send this response:
"""<response>"""

Predict the immediate user-side transition this response would cause.
Answer in EXACTLY this format, one line per field:
Needs: [updated needs or goals, one line]
Appraisal: [updated appraisal of the situation, one line]
Emotion: [updated emotional state, one line]''',
)


TRANSITION_NEXT = PromptTemplate(
    template_id="transition_next",
    required=frozenset(
        {"context", "response", "prev_step", "prev_needs", "prev_appraisal", "prev_emotion"}
    ),
    body='''You are reasoning from the user's perspective.

Dialogue context:
<context>

The assistant is about to send this response:
"""<response>"""

Previously predicted user state (step <prev_step>):
Needs: <prev_needs>
Appraisal: <prev_appraisal>
Emotion: <prev_emotion>

Predict the next user-side transition, refining or extending the previous prediction.
Answer in EXACTLY this format, one line per field:
Needs: [updated needs or goals, one line]
Appraisal: [updated appraisal of the situation, one line]
Emotion: [updated emotional state, one line]''',
)


SEED_SUMMARY = PromptTemplate(
    template_id="seed_summary",
    required=frozenset({"dialogue_text"}),
    body='''Summarize the following dialogue into a compact role-play scenario seed.

Dialogue:
<dialogue_text>

Return JSON only:
{
  "scenario": "...",
  "initial_prompt": "..."
}

- scenario: one sentence describing the assistant role and the user situation.
- initial_prompt: the opening user utterance, written in the first person.
- Preserve the essential situational and emotional context; do not copy later turns.''',
)


TEMPLATES: dict[str, PromptTemplate] = {
    t.template_id: t
    for t in (
        ROLLOUT_WITH_SCAFFOLD,
        ROLLOUT_PLAIN,
        USER_SIMULATOR,
        ANNOTATION_WITH_TRACE,
        ANNOTATION_RESPONSE_ONLY,
        EMOTION_JUDGE,
        TURN_JUDGE,
        COGNITIVE_JUDGE,
        TRACE_JUDGE,
        STRATEGY_FIT_JUDGE,
        TRANSITION_JUDGE,
        TRANSITION_FIRST,
        TRANSITION_NEXT,
        SEED_SUMMARY,
    )
}
