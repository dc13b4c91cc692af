"""Dynamic-programming kernels for the finite-MDP lab.

Two interchangeable backends: JIT-compiled loops (numba) and vectorized
numpy. The numba path is the default when numba imports; set
APPRAISAL_RL_NO_NUMBA=1 to force the numpy path. Both are exercised by the
test suite and compared by benchmarks/bench_mdp_kernels.py.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    njit = None
    _HAVE_NUMBA = False

NO_NUMBA_ENV = "APPRAISAL_RL_NO_NUMBA"


def numba_available() -> bool:
    return _HAVE_NUMBA


def use_numba() -> bool:
    if not _HAVE_NUMBA:
        return False
    return os.environ.get(NO_NUMBA_ENV, "").strip().lower() not in ("1", "true", "yes")


def backend_name() -> str:
    return "numba" if use_numba() else "numpy"


def _evaluate_q_loops(P, R, Pi, gamma, tol, max_iter):
    """Fixed-point policy evaluation; returns (Q, iterations, last_delta)."""
    n_states, n_actions = R.shape
    Q = np.zeros((n_states, n_actions))
    V = np.zeros(n_states)
    iterations = 0
    delta = tol + 1.0
    while delta > tol and iterations < max_iter:
        for s in range(n_states):
            v = 0.0
            for a in range(n_actions):
                v += Pi[s, a] * Q[s, a]
            V[s] = v
        delta = 0.0
        for s in range(n_states):
            for a in range(n_actions):
                backup = 0.0
                for s2 in range(n_states):
                    backup += P[s, a, s2] * V[s2]
                new_q = R[s, a] + gamma * backup
                diff = abs(new_q - Q[s, a])
                if diff > delta:
                    delta = diff
                Q[s, a] = new_q
        iterations += 1
    return Q, iterations, delta


def _truncated_q_loops(P, R, Pi, gamma, n):
    """Exact n-step truncated action values by backward induction."""
    n_states, n_actions = R.shape
    Q = np.zeros((n_states, n_actions))
    V = np.zeros(n_states)
    for _ in range(n):
        for s in range(n_states):
            v = 0.0
            for a in range(n_actions):
                v += Pi[s, a] * Q[s, a]
            V[s] = v
        for s in range(n_states):
            for a in range(n_actions):
                backup = 0.0
                for s2 in range(n_states):
                    backup += P[s, a, s2] * V[s2]
                Q[s, a] = R[s, a] + gamma * backup
    return Q


if _HAVE_NUMBA:
    _evaluate_q_jit = njit(cache=True)(_evaluate_q_loops)
    _truncated_q_jit = njit(cache=True)(_truncated_q_loops)


def evaluate_q_numpy(P, R, Pi, gamma, tol, max_iter):
    n_states, n_actions = R.shape
    flat_P = P.reshape(n_states * n_actions, n_states)
    Q = np.zeros((n_states, n_actions))
    iterations = 0
    delta = tol + 1.0
    while delta > tol and iterations < max_iter:
        V = (Pi * Q).sum(axis=1)
        new_Q = R + gamma * (flat_P @ V).reshape(n_states, n_actions)
        delta = float(np.abs(new_Q - Q).max())
        Q = new_Q
        iterations += 1
    return Q, iterations, delta


def truncated_q_numpy(P, R, Pi, gamma, n):
    n_states, n_actions = R.shape
    flat_P = P.reshape(n_states * n_actions, n_states)
    Q = np.zeros((n_states, n_actions))
    for _ in range(n):
        V = (Pi * Q).sum(axis=1)
        Q = R + gamma * (flat_P @ V).reshape(n_states, n_actions)
    return Q


def evaluate_q(P, R, Pi, gamma, tol, max_iter):
    if use_numba():
        return _evaluate_q_jit(P, R, Pi, gamma, tol, max_iter)
    return evaluate_q_numpy(P, R, Pi, gamma, tol, max_iter)


def truncated_q(P, R, Pi, gamma, n):
    if use_numba():
        return _truncated_q_jit(P, R, Pi, gamma, n)
    return truncated_q_numpy(P, R, Pi, gamma, n)
