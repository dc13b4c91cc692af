"""Benchmark the MDP dynamic-programming kernels: numba JIT vs vectorized numpy.

Run:  python benchmarks/bench_mdp_kernels.py [--states 64 --actions 8]

The JIT path is warmed up before timing so compile time is reported
separately. The same comparison can be forced package-wide by setting
APPRAISAL_RL_NO_NUMBA=1.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from appraisal_rl import _mdp_kernels
from appraisal_rl.mdp import generate_random_mdp, generate_random_policy


def time_call(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--states", type=int, default=64)
    parser.add_argument("--actions", type=int, default=8)
    parser.add_argument("--discount", type=float, default=0.99)
    parser.add_argument("--tol", type=float, default=1e-12)
    parser.add_argument("--n-steps", type=int, default=32)
    args = parser.parse_args()

    mdp = generate_random_mdp(args.states, args.actions, args.discount, 1.0, rng_seed=7)
    policy = generate_random_policy(args.states, args.actions, rng_seed=11)
    P, R, Pi = mdp.transitions, mdp.rewards, policy.probs
    max_iter = 10_000_000

    print(f"instance: {args.states} states x {args.actions} actions, discount={args.discount}")
    print(f"numba available: {_mdp_kernels.numba_available()}")

    rows = []
    t = time_call(_mdp_kernels.evaluate_q_numpy, P, R, Pi, args.discount, args.tol, max_iter)
    rows.append(("evaluate_q", "numpy", t))
    t = time_call(_mdp_kernels.truncated_q_numpy, P, R, Pi, args.discount, args.n_steps)
    rows.append((f"truncated_q(n={args.n_steps})", "numpy", t))

    if _mdp_kernels.numba_available():
        compile_start = time.perf_counter()
        _mdp_kernels._evaluate_q_jit(P, R, Pi, args.discount, args.tol, max_iter)
        _mdp_kernels._truncated_q_jit(P, R, Pi, args.discount, args.n_steps)
        print(f"jit warmup (incl. compile): {time.perf_counter() - compile_start:.3f}s")

        t = time_call(_mdp_kernels._evaluate_q_jit, P, R, Pi, args.discount, args.tol, max_iter)
        rows.append(("evaluate_q", "numba", t))
        t = time_call(_mdp_kernels._truncated_q_jit, P, R, Pi, args.discount, args.n_steps)
        rows.append((f"truncated_q(n={args.n_steps})", "numba", t))

        q_np, _, _ = _mdp_kernels.evaluate_q_numpy(P, R, Pi, args.discount, args.tol, max_iter)
        q_nb, _, _ = _mdp_kernels._evaluate_q_jit(P, R, Pi, args.discount, args.tol, max_iter)
        print(f"backend agreement: max |diff| = {np.abs(q_np - q_nb).max():.3e}")

    print(f"\n{'kernel':<24}{'backend':<10}{'best of 5':>12}")
    for name, backend, seconds in rows:
        print(f"{name:<24}{backend:<10}{seconds * 1e3:>10.2f}ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
