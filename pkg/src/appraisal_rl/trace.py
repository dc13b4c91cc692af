"""Structured reasoning traces: the think/response wire format.

An assistant turn either emits a bare response or a delimited think block
followed by the response. The think block carries five appraisal sections
in a fixed order (contextual facts, inferred needs, appraisal, emotional
state, response strategy), optionally followed by numbered
reverse-perspective steps and a final strategy-revision section. The
section labels and delimiters are exact wire strings: downstream judges,
fixtures, and prompt scaffolds depend on them byte-for-byte.

Parsing is strict by default and raises typed errors; ``parse_trace_lenient``
is the rollout-safe variant that degrades a malformed think block to a
bare-response trace instead of crashing a live episode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"
RESPONSE_OPEN = "<response>"
RESPONSE_CLOSE = "</response>"

FACTS_LABEL = "Contextual Facts"
NEEDS_LABEL = "Inferred Needs and Goals"
APPRAISAL_LABEL = "Appraisal"
EMOTION_LABEL = "Emotional State"
STRATEGY_LABEL = "Response Strategy"
RP_STEP_PREFIX = "Reverse-Perspective Step"
RP_STEP_OPTIONAL_PREFIX = "Optional Reverse-Perspective Step"
REVISION_LABEL = "Chosen Strategy Based on Reverse-Perspective Steps"
REVISION_OPTIONAL_LABEL = "Optional Strategy Revision Based on Reverse-Perspective Steps"

_SECTION_LINE_RE = re.compile(r"^\[([^\]]+)\]\s*(.*)$")


class TraceError(ValueError):
    """Base class for trace format errors."""


class MissingResponse(TraceError):
    """No response block, or the response block is empty."""


class SectionOrderViolation(TraceError):
    """Sections present but not in the schema order (or duplicated)."""


class UnknownSection(TraceError):
    """A bracketed label that is not part of the schema."""


class IncompleteState(TraceError):
    """A think block is present but a required appraisal section is missing."""


class InvariantViolation(TraceError):
    """A trace value that cannot be rendered losslessly."""


class IncompleteTuple(TraceError):
    """A knowledge tuple with an empty field where all four are required."""


@dataclass(frozen=True)
class TraceSchema:
    """Labels, delimiters, and limits of the trace wire format.

    Defaults are the canonical strings; aliases cover the teacher-side
    "Optional ..." labels, which parse to the same sections.
    """

    facts_label: str = FACTS_LABEL
    needs_label: str = NEEDS_LABEL
    appraisal_label: str = APPRAISAL_LABEL
    emotion_label: str = EMOTION_LABEL
    strategy_label: str = STRATEGY_LABEL
    rp_step_prefixes: tuple[str, ...] = (RP_STEP_PREFIX, RP_STEP_OPTIONAL_PREFIX)
    revision_labels: tuple[str, ...] = (REVISION_LABEL, REVISION_OPTIONAL_LABEL)
    think_open: str = THINK_OPEN
    think_close: str = THINK_CLOSE
    response_open: str = RESPONSE_OPEN
    response_close: str = RESPONSE_CLOSE
    max_rp_steps: int = 10

    def state_labels(self) -> tuple[str, str, str, str, str]:
        return (
            self.facts_label,
            self.needs_label,
            self.appraisal_label,
            self.emotion_label,
            self.strategy_label,
        )

    def step_label(self, index: int) -> str:
        return f"{self.rp_step_prefixes[0]} {index}"

    def delimiter_tokens(self) -> tuple[str, str, str, str]:
        return (self.think_open, self.think_close, self.response_open, self.response_close)

    def resolve_label(self, name: str) -> tuple[str, int]:
        """Map a bracketed section name to (kind, detail).

        Returns ("state", position) / ("step", step index) / ("revision", 0).
        Raises UnknownSection for anything else.
        """
        labels = self.state_labels()
        if name in labels:
            return ("state", labels.index(name))
        if name in self.revision_labels:
            return ("revision", 0)
        for prefix in self.rp_step_prefixes:
            m = re.fullmatch(re.escape(prefix) + r"\s+(\d+)", name)
            if m:
                return ("step", int(m.group(1)))
        raise UnknownSection(f"unknown section label: [{name}]")


DEFAULT_SCHEMA = TraceSchema()


@dataclass(frozen=True)
class AppraisalState:
    """One instantiation of the five appraisal sections at a turn."""

    facts: str = ""
    needs: str = ""
    appraisal: str = ""
    emotion: str = ""
    strategy: str = ""

    def sections(self) -> tuple[str, str, str, str, str]:
        return (self.facts, self.needs, self.appraisal, self.emotion, self.strategy)

    @property
    def complete(self) -> bool:
        return all(s.strip() for s in self.sections())


@dataclass(frozen=True)
class KnowledgeTuple:
    """Knowledge-grounded appraisal tuple: the four sections without a strategy."""

    facts: str = ""
    needs: str = ""
    appraisal: str = ""
    emotion: str = ""

    def sections(self) -> tuple[str, str, str, str]:
        return (self.facts, self.needs, self.appraisal, self.emotion)

    @property
    def complete(self) -> bool:
        return all(s.strip() for s in self.sections())


@dataclass(frozen=True)
class RpStep:
    """One numbered reverse-perspective section: raw payload text."""

    index: int
    text: str


@dataclass(frozen=True)
class ReasoningTrace:
    """A parsed assistant turn: optional appraisal state plus the response.

    gate == 0 means a bare response: no state, no steps, no revision.
    """

    response: str
    gate: int = 0
    state: AppraisalState | None = None
    rp_steps: tuple[RpStep, ...] = ()
    strategy_revision: str | None = None


@dataclass(frozen=True)
class EdgeCheck:
    """Consistency verdict for one dependency edge of the appraisal graph."""

    edge: str
    parents_present: bool
    child_present: bool

    @property
    def passed(self) -> bool:
        # A child may appear exactly when its parents do; a dangling child
        # (parent missing) fails the same as a missing child under full parents.
        return self.parents_present == self.child_present


@dataclass(frozen=True)
class DagReport:
    checks: tuple[EdgeCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def pass_fraction(self) -> float:
        return sum(1 for c in self.checks if c.passed) / len(self.checks)


def validate_dag(state: AppraisalState) -> DagReport:
    """Check the fixed dependency structure of an appraisal state.

    Edges: facts and needs feed the appraisal, the appraisal feeds the
    emotional state, and all four feed the strategy. Each check passes when
    the downstream section is present exactly when its parents are.
    """
    facts = bool(state.facts.strip())
    needs = bool(state.needs.strip())
    appraisal = bool(state.appraisal.strip())
    emotion = bool(state.emotion.strip())
    strategy = bool(state.strategy.strip())
    checks = (
        EdgeCheck("facts -> appraisal", facts, appraisal),
        EdgeCheck("needs -> appraisal", needs, appraisal),
        EdgeCheck("appraisal -> emotion", appraisal, emotion),
        EdgeCheck(
            "facts+needs+appraisal+emotion -> strategy",
            facts and needs and appraisal and emotion,
            strategy,
        ),
    )
    return DagReport(checks)


def _check_payload(payload: str, schema: TraceSchema, where: str) -> None:
    if not payload or payload != payload.strip():
        raise InvariantViolation(f"{where}: payload must be non-empty and stripped")
    for token in schema.delimiter_tokens():
        if token in payload:
            raise InvariantViolation(f"{where}: payload contains delimiter token {token!r}")
    for line in payload.splitlines()[1:]:
        if line.lstrip().startswith("["):
            raise InvariantViolation(
                f"{where}: continuation line starts with '[' and would parse as a section"
            )


def validate_trace(trace: ReasoningTrace, schema: TraceSchema = DEFAULT_SCHEMA) -> None:
    """Raise InvariantViolation unless the trace renders and re-parses losslessly."""
    if trace.gate not in (0, 1):
        raise InvariantViolation(f"gate must be 0 or 1, got {trace.gate!r}")
    if not trace.response or trace.response != trace.response.strip():
        raise InvariantViolation("response must be non-empty and stripped")
    if schema.response_close in trace.response:
        raise InvariantViolation("response contains the response-close token")
    if trace.gate == 0:
        if trace.state is not None or trace.rp_steps or trace.strategy_revision is not None:
            raise InvariantViolation("gate=0 traces carry only a response")
        return
    if trace.state is None or not trace.state.complete:
        raise InvariantViolation("gate=1 traces require a complete appraisal state")
    for label, payload in zip(schema.state_labels(), trace.state.sections()):
        _check_payload(payload, schema, f"[{label}]")
    if len(trace.rp_steps) > schema.max_rp_steps:
        raise InvariantViolation(
            f"{len(trace.rp_steps)} reverse-perspective steps exceed the cap of {schema.max_rp_steps}"
        )
    for position, step in enumerate(trace.rp_steps, start=1):
        if step.index != position:
            raise InvariantViolation(
                f"reverse-perspective steps must be numbered 1..m, got {step.index} at position {position}"
            )
        _check_payload(step.text, schema, f"[{schema.step_label(step.index)}]")
    if trace.strategy_revision is not None:
        _check_payload(trace.strategy_revision, schema, f"[{schema.revision_labels[0]}]")


def _think_lines(trace: ReasoningTrace, schema: TraceSchema) -> list[str]:
    assert trace.state is not None
    lines = [
        f"[{label}] {payload}"
        for label, payload in zip(schema.state_labels(), trace.state.sections())
    ]
    for step in trace.rp_steps:
        lines.append(f"[{schema.step_label(step.index)}] {step.text}")
    if trace.strategy_revision is not None:
        lines.append(f"[{schema.revision_labels[0]}] {trace.strategy_revision}")
    return lines


def think_text(trace: ReasoningTrace, schema: TraceSchema = DEFAULT_SCHEMA) -> str:
    """The labeled section lines of a gated trace, without delimiters."""
    if trace.gate != 1:
        return ""
    return "\n".join(_think_lines(trace, schema))


def render_trace(trace: ReasoningTrace, schema: TraceSchema = DEFAULT_SCHEMA) -> str:
    """Serialize a trace to wire text. Inverse of parse_trace."""
    validate_trace(trace, schema)
    response_block = f"{schema.response_open}\n{trace.response}\n{schema.response_close}"
    if trace.gate == 0:
        return response_block
    body = "\n".join(_think_lines(trace, schema))
    return f"{schema.think_open}\n{body}\n{schema.think_close}\n\n{response_block}"


def _extract_response(text: str, schema: TraceSchema) -> tuple[str, int]:
    pattern = re.compile(
        re.escape(schema.response_open) + r"(.*?)" + re.escape(schema.response_close),
        re.DOTALL,
    )
    m = pattern.search(text)
    if m is None:
        raise MissingResponse("no response block found")
    response = m.group(1).strip()
    if not response:
        raise MissingResponse("response block is empty")
    return response, m.start()


def _split_sections(inner: str, schema: TraceSchema) -> list[tuple[str, int, str]]:
    """Split think-block text into (kind, detail, payload) section triples."""
    sections: list[list] = []
    for line in inner.splitlines():
        probe = line.strip()
        if probe.startswith("["):
            m = _SECTION_LINE_RE.match(probe)
            if m is None:
                raise UnknownSection(f"malformed section line: {probe!r}")
            kind, detail = schema.resolve_label(m.group(1))
            sections.append([kind, detail, [m.group(2)] if m.group(2) else []])
        elif probe:
            if not sections:
                raise UnknownSection(f"text before the first section label: {probe!r}")
            sections[-1][2].append(line)
        elif sections:
            sections[-1][2].append(line)
    return [(kind, detail, "\n".join(chunks).strip()) for kind, detail, chunks in sections]


def _assemble_state(
    sections: list[tuple[str, int, str]], schema: TraceSchema
) -> tuple[AppraisalState, tuple[RpStep, ...], str | None]:
    labels = schema.state_labels()
    state_payloads: dict[int, str] = {}
    steps: list[RpStep] = []
    revision: str | None = None
    last_state_position = -1
    for kind, detail, payload in sections:
        if kind == "state":
            if steps or revision is not None:
                raise SectionOrderViolation(
                    f"[{labels[detail]}] appears after reverse-perspective content"
                )
            if detail in state_payloads:
                raise SectionOrderViolation(f"duplicate section [{labels[detail]}]")
            if detail < last_state_position:
                raise SectionOrderViolation(
                    f"[{labels[detail]}] out of order (expected before [{labels[last_state_position]}])"
                )
            last_state_position = detail
            state_payloads[detail] = payload
        elif kind == "step":
            if revision is not None:
                raise SectionOrderViolation("reverse-perspective step after the revision section")
            if detail != len(steps) + 1:
                raise SectionOrderViolation(
                    f"reverse-perspective step {detail} where step {len(steps) + 1} was expected"
                )
            if not payload:
                raise InvariantViolation(f"empty payload in reverse-perspective step {detail}")
            steps.append(RpStep(index=detail, text=payload))
        else:  # revision
            if revision is not None:
                raise SectionOrderViolation("duplicate strategy-revision section")
            if not payload:
                raise InvariantViolation("empty strategy-revision payload")
            revision = payload
    missing = [labels[i] for i in range(5) if not state_payloads.get(i, "")]
    if missing:
        raise IncompleteState(f"missing or empty section(s): {', '.join(missing)}")
    state = AppraisalState(*(state_payloads[i] for i in range(5)))
    return state, tuple(steps), revision


def parse_trace(text: str, schema: TraceSchema = DEFAULT_SCHEMA) -> ReasoningTrace:
    """Parse one complete model turn into a ReasoningTrace (strict).

    Raises MissingResponse, SectionOrderViolation, UnknownSection,
    IncompleteState, or InvariantViolation.
    """
    response, response_start = _extract_response(text, schema)
    head = text[:response_start]
    think_pattern = re.compile(
        re.escape(schema.think_open) + r"(.*?)" + re.escape(schema.think_close),
        re.DOTALL,
    )
    m = think_pattern.search(head)
    if m is None:
        if schema.think_open in head:
            raise InvariantViolation("unterminated think block")
        return ReasoningTrace(response=response)
    sections = _split_sections(m.group(1), schema)
    state, steps, revision = _assemble_state(sections, schema)
    trace = ReasoningTrace(
        response=response,
        gate=1,
        state=state,
        rp_steps=steps,
        strategy_revision=revision,
    )
    validate_trace(trace, schema)
    return trace


def parse_trace_lenient(
    text: str, schema: TraceSchema = DEFAULT_SCHEMA
) -> tuple[ReasoningTrace, TraceError | None]:
    """Rollout-safe parse: malformed think blocks degrade to a gate=0 trace.

    Returns (trace, error); error is the strict failure when degradation
    happened, None when the strict parse succeeded. A turn with no usable
    response text at all still raises MissingResponse.
    """
    try:
        return parse_trace(text, schema), None
    except MissingResponse as err:
        raw = text.strip()
        if not raw:
            raise
        return ReasoningTrace(response=raw), err
    except TraceError as err:
        response, _ = _extract_response(text, schema)
        return ReasoningTrace(response=response), err


def make_cpt_prefix(
    tup: KnowledgeTuple, context: str, schema: TraceSchema = DEFAULT_SCHEMA
) -> str:
    """Prepend a think-delimited linearization of the tuple to a dialogue context."""
    if not tup.complete:
        raise IncompleteTuple("all four tuple fields must be non-empty")
    labels = schema.state_labels()[:4]
    lines = [schema.think_open]
    lines.extend(f"[{label}] {payload}" for label, payload in zip(labels, tup.sections()))
    lines.append(schema.think_close)
    block = "\n".join(lines)
    return f"{block}\n\n{context}" if context else block


def make_sft_target(
    state: AppraisalState | None,
    response: str,
    gate: int,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> str:
    """Build a supervision target: gated think block plus response, or the response alone."""
    if gate not in (0, 1):
        raise InvariantViolation(f"gate must be 0 or 1, got {gate!r}")
    if not response.strip():
        raise InvariantViolation("response must be non-empty")
    if gate == 0:
        return response
    if state is None or not state.complete:
        raise IncompleteState("gate=1 targets require a complete appraisal state")
    lines = [schema.think_open]
    lines.extend(
        f"[{label}] {payload}" for label, payload in zip(schema.state_labels(), state.sections())
    )
    lines.append(schema.think_close)
    return "\n".join(lines) + f"\n\n{response}"
