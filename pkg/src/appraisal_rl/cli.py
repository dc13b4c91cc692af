"""Command-line surface wiring the pipeline together.

Subcommands: run-episodes (seeds -> episodes file), score (episodes ->
rewards in place), export-batches (scored episodes -> trainer batch file),
metrics (episodes -> summary report), verify-bound (finite-MDP truncation
suite), and depth-sweep (re-runs episodes across lookahead depths and
tabulates metrics per depth).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ConfigError, EngineConfig, build_agents, default_config, load_config
from .environment import RolloutMode, run_episode, run_group, EpisodeAborted
from .episodes import load_episodes, write_episodes, write_episodes_atomic
from .grpo import write_batch_records
from .lookahead import RpConfig
from .mdp import format_suite_table, run_bound_suite
from .metrics import format_table, outcomes_from_trajectories, summarize
from .pipeline import export_all_batches, score_trajectory
from .scenarios import load_seeds, sample_seeds


def _load_config_arg(path: str | None) -> EngineConfig:
    return load_config(path) if path else default_config()


def _apply_env_overrides(config: EngineConfig, args: argparse.Namespace) -> EngineConfig:
    env = config.env
    if getattr(args, "max_turns", None) is not None:
        env = dataclasses.replace(env, max_turns=args.max_turns)
    if getattr(args, "group_size", None) is not None:
        env = dataclasses.replace(env, group_size=args.group_size)
    if getattr(args, "rp_depth", None) is not None:
        env = dataclasses.replace(env, rp_depth=args.rp_depth)
        if args.rp_depth >= 1:
            config.rp = RpConfig(
                depth=args.rp_depth, early_stop=config.rp.early_stop, max_depth=config.rp.max_depth
            )
    config.env = env
    return config


def _selected_seeds(args: argparse.Namespace):
    seeds = load_seeds(args.seeds)
    if getattr(args, "sample", None) is not None:
        seeds = sample_seeds(seeds, args.sample, args.rng_seed)
    return seeds


def cmd_run_episodes(args: argparse.Namespace) -> int:
    config = _apply_env_overrides(_load_config_arg(args.config), args)
    seeds = _selected_seeds(args)
    agents = build_agents(config, required=("policy", "simulator", "judge"))
    mode = RolloutMode(args.mode)
    trajectories = []
    for seed in seeds:
        trajectories.extend(run_group(seed, agents, config.env, mode))
    count = write_episodes(args.out, trajectories)
    aborted = sum(1 for t in trajectories if t.termination.reason.value == "abort")
    print(f"wrote {count} episode(s) to {args.out}" + (f" ({aborted} aborted)" if aborted else ""))
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    config = _apply_env_overrides(_load_config_arg(args.config), args)
    agents = build_agents(config, required=("judge", "predictor"))
    trajectories = load_episodes(args.episodes)
    for trajectory in trajectories:
        score_trajectory(
            trajectory, agents, config.weights, config.rp, config.env.sampling
        )
    out = args.out or args.episodes
    count = write_episodes_atomic(out, trajectories)
    print(f"scored {count} episode(s) -> {out}")
    return 0


def cmd_export_batches(args: argparse.Namespace) -> int:
    config = _load_config_arg(args.config)
    trajectories = load_episodes(args.episodes)
    records = export_all_batches(trajectories, config.advantage_epsilon)
    count = write_batch_records(args.out, records)
    print(f"wrote {count} batch record(s) to {args.out}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    trajectories = load_episodes(args.episodes)
    outcomes = outcomes_from_trajectories(trajectories)
    summary = summarize(outcomes)
    print(format_table(summary))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(summary.to_record(), handle, indent=2)
            handle.write("\n")
        print(f"wrote summary record to {args.out}")
    return 0


def cmd_verify_bound(args: argparse.Namespace) -> int:
    report = run_bound_suite(
        instances=args.instances,
        max_states=args.max_states,
        max_actions=args.max_actions,
        n_max=args.n_max,
        rng_seed=args.rng_seed,
    )
    print(format_suite_table(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            for row in report.rows:
                handle.write(json.dumps(row.to_record()))
                handle.write("\n")
            handle.write(
                json.dumps(
                    {
                        "witness_gap": report.witness_gap,
                        "witness_bound": report.witness_bound,
                        "witness_passed": report.witness_passed,
                        "instances": report.instances,
                        "passed": report.passed,
                    }
                )
            )
            handle.write("\n")
        print(f"wrote bound report to {args.out}")
    return 0 if report.passed else 1


def cmd_depth_sweep(args: argparse.Namespace) -> int:
    config = _apply_env_overrides(_load_config_arg(args.config), args)
    seeds = _selected_seeds(args)
    depths = [int(d) for d in args.depths.split(",")]
    rows = []
    for depth in depths:
        env = dataclasses.replace(config.env, rp_depth=max(depth, 0), group_size=1)
        agents = build_agents(config, required=("policy", "simulator", "judge"))
        mode = RolloutMode.NO_SCAFFOLD if depth == 0 else RolloutMode.WITH_SCAFFOLD
        trajectories = []
        for seed in seeds:
            try:
                trajectories.append(run_episode(seed, agents, env, mode))
            except EpisodeAborted as err:
                trajectories.append(err.trajectory)
        summary = summarize(outcomes_from_trajectories(trajectories))
        rows.append({"depth": depth, **summary.to_record()})
    header = f"{'depth':>5} {'SR%':>8} {'AT':>6} {'ES':>6} {'EG/turn':>8} {'EA':>6} {'FA%':>8}"
    print(header)
    for row in rows:
        at = f"{row['avg_turns']:.2f}" if row["avg_turns"] is not None else "-"
        print(
            f"{row['depth']:>5d} {row['success_rate']:>8.2f} {at:>6} "
            f"{row['emotional_state']:>6.2f} {row['eg_per_turn']:>8.3f} "
            f"{row['empathic_appropriateness']:>6.2f} {row['factual_accuracy']:>8.2f}"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            for row in rows:
                handle.write(json.dumps(row))
                handle.write("\n")
        print(f"wrote sweep rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="appraisal-rl",
        description="Appraisal-grounded multi-turn role-play RL harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, config=True, rng=True) -> None:
        if config:
            p.add_argument("--config", help="engine config JSON")
        if rng:
            p.add_argument("--rng-seed", type=int, default=0)

    p = sub.add_parser("run-episodes", help="roll out episodes from scenario seeds")
    add_common(p)
    p.add_argument("--seeds", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sample", type=int, help="sample this many seeds (without replacement)")
    p.add_argument("--mode", choices=[m.value for m in RolloutMode], default="scaffold")
    p.add_argument("--group-size", type=int)
    p.add_argument("--max-turns", type=int)
    p.add_argument("--rp-depth", type=int)
    p.set_defaults(fn=cmd_run_episodes)

    p = sub.add_parser("score", help="fill per-turn rewards and trajectory scores in place")
    add_common(p, rng=False)
    p.add_argument("--episodes", required=True)
    p.add_argument("--out", help="defaults to rewriting the episodes file")
    p.add_argument("--rp-depth", type=int)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("export-batches", help="export group-normalized trainer batches")
    add_common(p, rng=False)
    p.add_argument("--episodes", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_batches)

    p = sub.add_parser("metrics", help="summarize recorded episodes")
    p.add_argument("--episodes", required=True)
    p.add_argument("--out", help="optional JSON summary output")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("verify-bound", help="verify the truncation bound on a generated MDP suite")
    add_common(p, config=False)
    p.add_argument("--instances", type=int, default=102)
    p.add_argument("--max-states", type=int, default=8)
    p.add_argument("--max-actions", type=int, default=4)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--out", help="optional JSONL report output")
    p.set_defaults(fn=cmd_verify_bound)

    p = sub.add_parser("depth-sweep", help="run episodes across lookahead depths and tabulate")
    add_common(p)
    p.add_argument("--seeds", required=True)
    p.add_argument("--out", help="optional JSONL row output")
    p.add_argument("--sample", type=int)
    p.add_argument("--depths", default="0,1,2,3,4")
    p.add_argument("--max-turns", type=int)
    p.set_defaults(fn=cmd_depth_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
