"""Agent gateway: one interface over the four model roles.

Every role (policy, user simulator, judge, transition predictor) is an Agent
with a single complete() entry point. Scripted and callable agents make the
whole pipeline deterministic in tests; HttpChatAgent talks to any
OpenAI-compatible chat-completions endpoint with bounded retries and a
process-wide concurrency cap.
"""

from __future__ import annotations

import json
import os
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence


class AgentRole(str, Enum):
    POLICY = "policy"
    USER_SIMULATOR = "simulator"
    JUDGE = "judge"
    TRANSITION_PREDICTOR = "predictor"


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid chat role: {self.role!r}")
        if not self.content:
            raise ValueError("chat message content must be non-empty")


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.8
    top_p: float = 0.9
    top_k: int = 50
    repetition_penalty: float = 1.1
    max_new_tokens: int = 256

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")
        if self.repetition_penalty <= 0:
            raise ValueError("repetition_penalty must be > 0")
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be > 0")


class AgentError(RuntimeError):
    """Base class for agent failures."""


class TransportError(AgentError):
    """Network or endpoint failure; retriable."""


class BadResponse(AgentError):
    """The endpoint answered but the payload was unusable."""


class ScriptExhausted(AgentError):
    """A scripted agent ran out of lines."""


class Agent:
    """A role-bound completion source."""

    def __init__(self, role: AgentRole) -> None:
        self.role = role

    def complete(self, messages: Sequence[ChatMessage], params: SamplingParams) -> str:
        raise NotImplementedError

    def describe(self) -> str:
        return f"{type(self).__name__}({self.role.value})"


def _check_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")


class ScriptedAgent(Agent):
    """Replays a fixed list of lines, one per call.

    Strict mode (the default) raises ScriptExhausted past the last line;
    with cycle=True the script repeats, which keeps multi-episode scripted
    runs going without enumerating every call.
    """

    def __init__(self, role: AgentRole, lines: Sequence[str], cycle: bool = False) -> None:
        super().__init__(role)
        if not lines:
            raise ValueError("scripted agent needs at least one line")
        self.lines = list(lines)
        self.cycle = cycle
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[ChatMessage], params: SamplingParams) -> str:
        _check_messages(messages)
        with self._lock:
            position = self.calls
            self.calls += 1
        if position >= len(self.lines):
            if not self.cycle:
                raise ScriptExhausted(
                    f"{self.role.value} script exhausted after {len(self.lines)} line(s)"
                )
            position %= len(self.lines)
        return self.lines[position]

    def describe(self) -> str:
        return f"scripted({self.role.value}, {len(self.lines)} lines, cycle={self.cycle})"


class CallableAgent(Agent):
    """Wraps a deterministic function of the message list."""

    def __init__(self, role: AgentRole, fn: Callable[[Sequence[ChatMessage]], str]) -> None:
        super().__init__(role)
        self._fn = fn

    def complete(self, messages: Sequence[ChatMessage], params: SamplingParams) -> str:
        _check_messages(messages)
        return self._fn(messages)

    def describe(self) -> str:
        return f"callable({self.role.value})"


def _urllib_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    body = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as err:
        raise TransportError(f"endpoint returned HTTP {err.code}") from err
    except (urllib.error.URLError, TimeoutError, OSError) as err:
        raise TransportError(f"endpoint unreachable: {err}") from err
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise BadResponse(f"endpoint payload is not JSON: {err}") from err


_global_gate: threading.Semaphore | None = None


def configure_global_concurrency(limit: int | None) -> None:
    """Cap in-flight HTTP completions across ALL agents (None lifts the cap)."""
    global _global_gate
    if limit is None:
        _global_gate = None
    else:
        if limit < 1:
            raise ValueError("concurrency limit must be >= 1")
        _global_gate = threading.Semaphore(limit)


class _NullGate:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


class HttpChatAgent(Agent):
    """OpenAI-compatible chat-completions client.

    The request body carries model, messages, temperature, top_p, and
    max_tokens; sampling values are forwarded verbatim. Transport failures
    retry with bounded exponential backoff (max_attempts total), after which
    the error propagates so the episode can abort with a recorded reason.
    Calls honor both the per-agent cap and the optional process-wide cap set
    via configure_global_concurrency.
    """

    def __init__(
        self,
        role: AgentRole,
        endpoint: str,
        model: str,
        api_key_env: str = "APPRAISAL_RL_API_KEY",
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        max_concurrency: int = 8,
        transport: Callable[[str, dict, dict, float], dict] | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        super().__init__(role)
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._transport = transport or _urllib_transport
        self._sleeper = sleeper
        self._gate = threading.Semaphore(max_concurrency)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "").strip()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, messages: Sequence[ChatMessage], params: SamplingParams) -> str:
        _check_messages(messages)
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_new_tokens,
        }
        last_error: TransportError | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                self._sleeper(self.backoff * (2 ** (attempt - 1)))
            try:
                with (_global_gate or _NullGate()), self._gate:
                    reply = self._transport(self.endpoint, payload, self._headers(), self.timeout)
                return self._extract_content(reply)
            except TransportError as err:
                last_error = err
        raise TransportError(
            f"{self.role.value} endpoint failed after {self.max_attempts} attempt(s): {last_error}"
        )

    @staticmethod
    def _extract_content(reply: dict) -> str:
        choices = reply.get("choices") if isinstance(reply, dict) else None
        if not choices:
            raise BadResponse("endpoint reply has no choices")
        message = choices[0].get("message") if isinstance(choices[0], dict) else None
        content = message.get("content") if isinstance(message, dict) else None
        if not isinstance(content, str) or not content:
            raise BadResponse("endpoint reply has no message content")
        return content

    def describe(self) -> str:
        return f"http({self.role.value}, {self.endpoint}, model={self.model})"


@dataclass
class AgentSet:
    """The role bindings one pipeline run works with."""

    policy: Agent | None = None
    simulator: Agent | None = None
    judge: Agent | None = None
    predictor: Agent | None = None

    def for_role(self, role: AgentRole) -> Agent:
        agent = {
            AgentRole.POLICY: self.policy,
            AgentRole.USER_SIMULATOR: self.simulator,
            AgentRole.JUDGE: self.judge,
            AgentRole.TRANSITION_PREDICTOR: self.predictor,
        }[role]
        if agent is None:
            raise ValueError(f"no agent bound for role {role.value!r}")
        return agent

    def describe(self) -> dict[str, str]:
        return {
            role.value: agent.describe()
            for role, agent in (
                (AgentRole.POLICY, self.policy),
                (AgentRole.USER_SIMULATOR, self.simulator),
                (AgentRole.JUDGE, self.judge),
                (AgentRole.TRANSITION_PREDICTOR, self.predictor),
            )
            if agent is not None
        }
