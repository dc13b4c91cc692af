"""Engine configuration: one JSON document holding weights, env, lookahead,
surrogate settings, recorded trainer defaults, and per-role agent bindings.

Agent bindings are either scripted (deterministic line lists, for tests and
golden runs) or http (an OpenAI-compatible endpoint). Credentials never
live in the file: each http binding names the environment variable that
holds its key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .agents import (
    Agent,
    AgentRole,
    AgentSet,
    HttpChatAgent,
    SamplingParams,
    ScriptedAgent,
)
from .environment import DEFAULT_END_INDICATORS, EnvConfig
from .grpo import DEFAULT_ADVANTAGE_EPSILON, SurrogateConfig
from .lookahead import RpConfig
from .rewards import RewardWeights

DEFAULT_API_KEY_ENV = "APPRAISAL_RL_API_KEY"

# Optimizer settings recorded for the external trainer; nothing in this
# package applies them.
TRAINER_DEFAULTS: dict[str, Any] = {
    "kl_beta": 0.01,
    "learning_rate": 1e-5,
    "grad_clip": 1.0,
    "max_rl_steps": 50,
    "lora_rank": 16,
    "lora_alpha": 32,
    "lora_dropout": 0.1,
}


class ConfigError(ValueError):
    pass


@dataclass
class EngineConfig:
    weights: RewardWeights = field(default_factory=RewardWeights)
    env: EnvConfig = field(default_factory=EnvConfig)
    rp: RpConfig = field(default_factory=RpConfig)
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    advantage_epsilon: float = DEFAULT_ADVANTAGE_EPSILON
    trainer: dict[str, Any] = field(default_factory=lambda: dict(TRAINER_DEFAULTS))
    agents: dict[str, dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.as_dict(),
            "env": {
                "max_turns": self.env.max_turns,
                "group_size": self.env.group_size,
                "rp_depth": self.env.rp_depth,
                "end_indicators": list(self.env.end_indicators),
                "sampling": {
                    "temperature": self.env.sampling.temperature,
                    "top_p": self.env.sampling.top_p,
                    "top_k": self.env.sampling.top_k,
                    "repetition_penalty": self.env.sampling.repetition_penalty,
                    "max_new_tokens": self.env.sampling.max_new_tokens,
                },
            },
            "rp": {
                "depth": self.rp.depth,
                "early_stop": self.rp.early_stop,
                "max_depth": self.rp.max_depth,
            },
            "grpo": {
                "clip": self.surrogate.clip,
                "kl_beta": self.surrogate.kl_beta,
                "advantage_epsilon": self.advantage_epsilon,
            },
            "trainer": dict(self.trainer),
            "agents": {role: dict(spec) for role, spec in self.agents.items()},
        }


def default_config() -> EngineConfig:
    return EngineConfig()


def _build_sampling(raw: dict[str, Any]) -> SamplingParams:
    return SamplingParams(
        temperature=raw.get("temperature", 0.8),
        top_p=raw.get("top_p", 0.9),
        top_k=raw.get("top_k", 50),
        repetition_penalty=raw.get("repetition_penalty", 1.1),
        max_new_tokens=raw.get("max_new_tokens", 256),
    )


def config_from_dict(raw: dict[str, Any]) -> EngineConfig:
    weights_raw = raw.get("weights", {})
    env_raw = raw.get("env", {})
    rp_raw = raw.get("rp", {})
    grpo_raw = raw.get("grpo", {})
    try:
        weights = RewardWeights(
            cog=weights_raw.get("cog", 1.0),
            arg=weights_raw.get("arg", 1.0),
            rp=weights_raw.get("rp", 1.0),
            overthink=weights_raw.get("overthink", 1.0),
            emo=weights_raw.get("emo", 1.0),
        )
        env = EnvConfig(
            max_turns=env_raw.get("max_turns", 8),
            group_size=env_raw.get("group_size", 4),
            rp_depth=env_raw.get("rp_depth", 3),
            end_indicators=tuple(env_raw.get("end_indicators", DEFAULT_END_INDICATORS)),
            sampling=_build_sampling(env_raw.get("sampling", {})),
        )
        rp = RpConfig(
            depth=rp_raw.get("depth", 3),
            early_stop=rp_raw.get("early_stop", True),
            max_depth=rp_raw.get("max_depth", 10),
        )
        surrogate = SurrogateConfig(
            clip=grpo_raw.get("clip", 0.2),
            kl_beta=grpo_raw.get("kl_beta", 0.01),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
    trainer = dict(TRAINER_DEFAULTS)
    trainer.update(raw.get("trainer", {}))
    return EngineConfig(
        weights=weights,
        env=env,
        rp=rp,
        surrogate=surrogate,
        advantage_epsilon=grpo_raw.get("advantage_epsilon", DEFAULT_ADVANTAGE_EPSILON),
        trainer=trainer,
        agents={role: dict(spec) for role, spec in raw.get("agents", {}).items()},
    )


def load_config(path: str) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    return config_from_dict(raw)


def save_config(config: EngineConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(config.to_dict(), handle, indent=2, ensure_ascii=False)
        handle.write("\n")


def build_agent(role: AgentRole, spec: dict[str, Any]) -> Agent:
    kind = spec.get("kind", "http")
    if kind == "scripted":
        lines = spec.get("lines")
        if not lines:
            raise ConfigError(f"scripted agent for {role.value!r} needs non-empty 'lines'")
        return ScriptedAgent(role, [str(line) for line in lines], cycle=bool(spec.get("cycle")))
    if kind == "http":
        endpoint = spec.get("endpoint", "")
        model = spec.get("model", "")
        if not endpoint or not model:
            raise ConfigError(f"http agent for {role.value!r} needs 'endpoint' and 'model'")
        return HttpChatAgent(
            role,
            endpoint=endpoint,
            model=model,
            api_key_env=spec.get("api_key_env", DEFAULT_API_KEY_ENV),
            timeout=spec.get("timeout", 60.0),
            max_attempts=spec.get("max_attempts", 3),
            backoff=spec.get("backoff", 0.5),
            max_concurrency=spec.get("max_concurrency", 8),
        )
    raise ConfigError(f"unknown agent kind {kind!r} for role {role.value!r}")


def build_agents(config: EngineConfig, required: tuple[str, ...] = ()) -> AgentSet:
    """Construct the role-bound agents named in the config.

    Missing optional roles stay unbound; every role in `required` must have
    a binding.
    """
    agents = AgentSet()
    for role in AgentRole:
        spec = config.agents.get(role.value)
        if spec is None:
            continue
        agent = build_agent(role, spec)
        if role is AgentRole.POLICY:
            agents.policy = agent
        elif role is AgentRole.USER_SIMULATOR:
            agents.simulator = agent
        elif role is AgentRole.JUDGE:
            agents.judge = agent
        else:
            agents.predictor = agent
    for name in required:
        if getattr(agents, name, None) is None:
            raise ConfigError(f"config does not bind the required {name!r} agent")
    return agents
