"""Appraisal-grounded multi-turn role-play RL harness.

Structured appraisal reasoning traces, a scenario-seeded role-play
environment with judge scoring, reverse-perspective lookahead rewards,
group-normalized trajectory advantages with batch export, a finite-MDP
truncation-bound lab, and the evaluation metrics CLI. All model roles sit
behind pluggable agents, so the full pipeline runs deterministically under
scripted agents and unchanged against real chat endpoints.
"""

from .agents import (
    Agent,
    AgentRole,
    AgentSet,
    CallableAgent,
    ChatMessage,
    HttpChatAgent,
    SamplingParams,
    ScriptedAgent,
)
from .environment import (
    DEFAULT_END_INDICATORS,
    EnvConfig,
    EpisodeAborted,
    RolloutMode,
    Termination,
    TerminationReason,
    Trajectory,
    Turn,
    check_termination,
    run_episode,
    run_group,
)
from .grpo import (
    GroupBatch,
    SurrogateConfig,
    advantages,
    clipped_term,
    export_batch,
    group_stats,
    sequence_ratio,
)
from .judging import JudgeTurn, parse_judge_emotion, parse_judge_turn
from .lookahead import (
    LookaheadResult,
    RpConfig,
    UserTransition,
    parse_transition,
    predict_transition,
    rollout,
    score_rp,
)
from .mdp import (
    FiniteMdp,
    StationaryPolicy,
    exact_q,
    generate_random_mdp,
    generate_random_policy,
    run_bound_suite,
    truncated_q,
    verify_bound,
)
from .metrics import (
    EpisodeOutcome,
    MetricsSummary,
    outcome_from_trajectory,
    summarize,
)
from .rewards import (
    EmotionTrace,
    RewardWeights,
    TurnRewards,
    aggregate_turn,
    emo_reward,
    score_arg,
    score_cog,
    score_overthink,
    trajectory_reward,
)
from .scenarios import ScenarioSeed, SeedSet, load_seeds, sample_seeds, save_seeds
from .trace import (
    AppraisalState,
    KnowledgeTuple,
    ReasoningTrace,
    RpStep,
    TraceSchema,
    make_cpt_prefix,
    make_sft_target,
    parse_trace,
    parse_trace_lenient,
    render_trace,
    validate_dag,
)

__version__ = "0.1.0"
