"""Pipeline glue: reward scoring over recorded episodes and batch assembly.

run-episodes produces trajectories with judge signals but no rewards; the
scoring pass fills in the four turn components (re-querying the judge and
running the lookahead predictor), aggregates the trajectory score, and
stamps which agents did the scoring. Batch assembly groups scored
trajectories by group id and exports trainer records.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .agents import AgentSet, SamplingParams
from .environment import TerminationReason, Trajectory, Turn
from .grpo import GroupBatch, export_batch
from .lookahead import RpConfig, UnparseableTransition, rollout, score_rp
from .rewards import (
    EmotionTrace,
    RewardWeights,
    TurnRewards,
    aggregate_turn,
    score_arg,
    score_cog,
    score_overthink,
    trajectory_reward,
)
from .trace import DEFAULT_SCHEMA, TraceSchema


def score_turn(
    turn: Turn,
    agents: AgentSet,
    weights: RewardWeights,
    rp_config: RpConfig,
    params: SamplingParams,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> Turn:
    """Fill in the turn's reward components and lookahead log in place."""
    if agents.judge is None or agents.predictor is None:
        raise ValueError("scoring needs judge and predictor agents")
    flags = list(turn.flags)

    cog, flag = score_cog(turn.context, turn.trace.response, agents.judge, params)
    if flag is not None:
        flags.append(f"cog_judge: {flag}")
    arg, flag = score_arg(turn.trace, turn.context, agents.judge, params, schema)
    if flag is not None:
        flags.append(f"arg_judge: {flag}")

    rp = 0.0
    lookahead_steps = None
    try:
        result = rollout(turn.context, turn.trace.response, rp_config, agents.predictor, params)
        lookahead_steps = result.steps
        rp, flag = score_rp(result.final, turn.context, turn.trace.response, agents.judge, params)
        if flag is not None:
            flags.append(f"rp_judge: {flag}")
    except UnparseableTransition as err:
        flags.append(f"rp_predictor: step {err.step_index}: {err}")

    query_simple = bool(turn.judge_turn.query_simple) if turn.judge_turn is not None else False
    overthink = score_overthink(turn.trace, query_simple, rp_config)

    components = TurnRewards(cog=cog, arg=arg, rp=rp, overthink=overthink)
    turn.rewards = replace(components, total=aggregate_turn(components, weights))
    turn.lookahead = lookahead_steps
    turn.flags = tuple(flags)
    return turn


def score_trajectory(
    trajectory: Trajectory,
    agents: AgentSet,
    weights: RewardWeights,
    rp_config: RpConfig,
    params: SamplingParams,
    schema: TraceSchema = DEFAULT_SCHEMA,
) -> Trajectory:
    """Score every turn and aggregate the trajectory reward."""
    for turn in trajectory.turns:
        score_turn(turn, agents, weights, rp_config, params, schema)
    emotion = EmotionTrace(initial=trajectory.initial_emotion, final=trajectory.final_emotion)
    components = [turn.rewards for turn in trajectory.turns if turn.rewards is not None]
    trajectory.reward = trajectory_reward(components, emotion, weights)
    trajectory.scored_by = agents.describe()
    return trajectory


def group_batches(
    trajectories: Sequence[Trajectory],
    epsilon: float,
    include_aborted: bool = False,
) -> list[tuple[GroupBatch, list[Trajectory]]]:
    """Group scored trajectories by group id, preserving first-seen order."""
    groups: dict[str, list[Trajectory]] = {}
    for trajectory in trajectories:
        if not include_aborted and trajectory.termination.reason is TerminationReason.ABORT:
            continue
        if trajectory.reward is None:
            raise ValueError(
                f"trajectory {trajectory.trajectory_id!r} has no reward; run the scoring pass first"
            )
        key = trajectory.group_id or trajectory.seed.id
        groups.setdefault(key, []).append(trajectory)
    return [
        (GroupBatch.from_scores(key, [t.reward for t in members], epsilon), members)
        for key, members in groups.items()
    ]


def export_all_batches(
    trajectories: Sequence[Trajectory],
    epsilon: float,
    include_aborted: bool = False,
) -> list[dict]:
    records: list[dict] = []
    for batch, members in group_batches(trajectories, epsilon, include_aborted):
        records.extend(export_batch(batch, members))
    return records
