"""Finite MDP lab: exact vs n-step truncated action values, and the truncation bound.

For a discounted MDP with rewards bounded by reward_bound and discount g,
the gap between the exact action value and its n-step truncation is at most
g**n * reward_bound / (1 - g). This module computes both sides exactly (by
dynamic programming over the kernel, no sampling) and verifies the bound
over generated instances. Sizes are desk-scale by design: exact DP on a few
dozen states stays sub-second.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _mdp_kernels

_ROW_SUM_TOL = 1e-12
DEFAULT_TOL = 1e-12
_MAX_ITERATIONS = 10_000_000


class MdpError(ValueError):
    pass


class NonStochastic(MdpError):
    """A transition or policy row does not sum to one."""


def _check_stochastic(rows: np.ndarray, what: str) -> None:
    if np.any(rows < -_ROW_SUM_TOL):
        raise NonStochastic(f"{what} has negative entries")
    sums = rows.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > _ROW_SUM_TOL):
        worst = float(np.abs(sums - 1.0).max())
        raise NonStochastic(f"{what} rows must sum to 1 within {_ROW_SUM_TOL} (off by {worst:.3e})")


@dataclass(frozen=True)
class FiniteMdp:
    """Tabular MDP: transitions (S, A, S), rewards (S, A), discount, reward bound."""

    transitions: np.ndarray
    rewards: np.ndarray
    discount: float
    reward_bound: float

    def __post_init__(self) -> None:
        P = np.asarray(self.transitions, dtype=np.float64)
        R = np.asarray(self.rewards, dtype=np.float64)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise MdpError(f"transitions must have shape (S, A, S), got {P.shape}")
        if R.shape != P.shape[:2]:
            raise MdpError(f"rewards shape {R.shape} does not match transitions {P.shape[:2]}")
        if not 0.0 < self.discount < 1.0:
            raise MdpError(f"discount must be in (0, 1), got {self.discount}")
        if self.reward_bound <= 0:
            raise MdpError(f"reward_bound must be > 0, got {self.reward_bound}")
        if np.any(np.abs(R) > self.reward_bound):
            raise MdpError("a reward exceeds the declared bound")
        _check_stochastic(P.reshape(-1, P.shape[2]), "transition kernel")
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "rewards", R)

    @property
    def n_states(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_actions(self) -> int:
        return self.rewards.shape[1]


@dataclass(frozen=True)
class StationaryPolicy:
    """Action probabilities per state, shape (S, A)."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise MdpError(f"policy must have shape (S, A), got {probs.shape}")
        _check_stochastic(probs, "policy")
        object.__setattr__(self, "probs", probs)


def exact_q(mdp: FiniteMdp, policy: StationaryPolicy, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Action values under the policy, iterated until the sup-norm change < tol.

    The result is within tol / (1 - discount) of the true fixed point.
    """
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise MdpError("policy shape does not match the MDP")
    Q, iterations, delta = _mdp_kernels.evaluate_q(
        mdp.transitions, mdp.rewards, policy.probs, mdp.discount, tol, _MAX_ITERATIONS
    )
    if delta > tol:
        raise MdpError(f"policy evaluation did not converge in {iterations} iterations")
    return np.asarray(Q)


def truncated_q(mdp: FiniteMdp, policy: StationaryPolicy, n: int) -> np.ndarray:
    """Exact n-step truncated action values (expected discounted sum of n rewards)."""
    if n < 1:
        raise MdpError(f"truncation depth must be >= 1, got {n}")
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise MdpError("policy shape does not match the MDP")
    return np.asarray(
        _mdp_kernels.truncated_q(mdp.transitions, mdp.rewards, policy.probs, mdp.discount, n)
    )


def truncation_bound(mdp: FiniteMdp, n: int) -> float:
    return mdp.discount**n * mdp.reward_bound / (1.0 - mdp.discount)


@dataclass(frozen=True)
class BoundRow:
    n: int
    max_gap: float
    bound: float
    passed: bool

    @property
    def ratio(self) -> float:
        return self.max_gap / self.bound if self.bound > 0 else 0.0

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "max_gap": self.max_gap,
            "bound": self.bound,
            "ratio": self.ratio,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class BoundReport:
    rows: tuple[BoundRow, ...]
    discount: float
    reward_bound: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def verify_bound(
    mdp: FiniteMdp,
    policy: StationaryPolicy,
    n_max: int,
    slack: float = 1e-9,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Compare max |Q - Q^(n)| against the truncation bound for each n <= n_max."""
    if n_max < 1:
        raise MdpError(f"n_max must be >= 1, got {n_max}")
    if n_max > MAX_TRUNCATION_DEPTH:
        raise MdpError(f"n_max is capped at {MAX_TRUNCATION_DEPTH}")
    exact = exact_q(mdp, policy, tol)
    rows = []
    for n in range(1, n_max + 1):
        gap = float(np.abs(exact - truncated_q(mdp, policy, n)).max())
        bound = truncation_bound(mdp, n)
        rows.append(BoundRow(n=n, max_gap=gap, bound=bound, passed=gap <= bound + slack))
    return BoundReport(rows=tuple(rows), discount=mdp.discount, reward_bound=mdp.reward_bound)


# Desk-scale caps: exact DP on generated instances stays sub-second.
MAX_STATES = 64
MAX_ACTIONS = 8
MAX_TRUNCATION_DEPTH = 32


def generate_random_mdp(
    states: int,
    actions: int,
    discount: float,
    reward_bound: float,
    rng_seed: int,
) -> FiniteMdp:
    """Random dense MDP, deterministic in rng_seed; rewards uniform in +-reward_bound."""
    if states < 1 or actions < 1:
        raise MdpError("states and actions must be >= 1")
    if states > MAX_STATES or actions > MAX_ACTIONS:
        raise MdpError(
            f"generated instances are capped at {MAX_STATES} states x {MAX_ACTIONS} actions"
        )
    rng = np.random.default_rng(rng_seed)
    P = rng.random((states, actions, states)) + 1e-3
    P /= P.sum(axis=-1, keepdims=True)
    R = rng.uniform(-reward_bound, reward_bound, size=(states, actions))
    return FiniteMdp(transitions=P, rewards=R, discount=discount, reward_bound=reward_bound)


def generate_random_policy(states: int, actions: int, rng_seed: int) -> StationaryPolicy:
    rng = np.random.default_rng(rng_seed)
    probs = rng.random((states, actions)) + 1e-3
    probs /= probs.sum(axis=-1, keepdims=True)
    return StationaryPolicy(probs=probs)


def constant_reward_witness(discount: float = 0.9, reward: float = 1.0) -> FiniteMdp:
    """Single-state, single-action MDP where the truncation gap attains the bound."""
    return FiniteMdp(
        transitions=np.ones((1, 1, 1)),
        rewards=np.full((1, 1), reward),
        discount=discount,
        reward_bound=abs(reward),
    )


@dataclass(frozen=True)
class SuiteRow:
    """Worst case over suite instances at one (discount, n) cell."""

    discount: float
    n: int
    max_gap: float
    bound: float
    worst_ratio: float
    passed: bool

    def to_record(self) -> dict:
        return {
            "discount": self.discount,
            "n": self.n,
            "max_gap": self.max_gap,
            "bound": self.bound,
            "worst_ratio": self.worst_ratio,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class SuiteReport:
    rows: tuple[SuiteRow, ...]
    instances: int
    witness_gap: float
    witness_bound: float
    witness_passed: bool

    @property
    def passed(self) -> bool:
        return self.witness_passed and all(row.passed for row in self.rows)


def run_bound_suite(
    instances: int = 102,
    max_states: int = 8,
    max_actions: int = 4,
    discounts: tuple[float, ...] = (0.5, 0.9, 0.99),
    n_max: int = 10,
    reward_bound: float = 1.0,
    slack: float = 1e-9,
    rng_seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> SuiteReport:
    """Verify the truncation bound over a generated instance suite.

    Instances cycle through the discount grid with randomized sizes and
    random stationary policies; the report aggregates the worst gap per
    (discount, n) cell and includes the tightness witness (constant-reward
    single-state MDP at discount 0.9, n = 3, where gap equals bound).
    """
    size_rng = np.random.default_rng(rng_seed)
    worst: dict[tuple[float, int], SuiteRow] = {}
    for index in range(instances):
        discount = discounts[index % len(discounts)]
        states = int(size_rng.integers(1, max_states + 1))
        actions = int(size_rng.integers(1, max_actions + 1))
        mdp = generate_random_mdp(states, actions, discount, reward_bound, rng_seed + 1000 + index)
        policy = generate_random_policy(states, actions, rng_seed + 5000 + index)
        report = verify_bound(mdp, policy, n_max, slack, tol)
        for row in report.rows:
            key = (discount, row.n)
            prior = worst.get(key)
            passed = row.passed and (prior.passed if prior is not None else True)
            gap = row.max_gap if prior is None else max(row.max_gap, prior.max_gap)
            worst[key] = SuiteRow(
                discount=discount,
                n=row.n,
                max_gap=gap,
                bound=row.bound,
                worst_ratio=gap / row.bound if row.bound > 0 else 0.0,
                passed=passed,
            )

    witness = constant_reward_witness(discount=0.9, reward=1.0)
    witness_policy = StationaryPolicy(np.ones((1, 1)))
    witness_gap = float(
        np.abs(exact_q(witness, witness_policy, tol) - truncated_q(witness, witness_policy, 3)).max()
    )
    witness_bound = truncation_bound(witness, 3)
    rows = tuple(worst[key] for key in sorted(worst))
    return SuiteReport(
        rows=rows,
        instances=instances,
        witness_gap=witness_gap,
        witness_bound=witness_bound,
        witness_passed=abs(witness_gap - witness_bound) <= 1e-9,
    )


def format_suite_table(report: SuiteReport) -> str:
    lines = [
        f"{'discount':>9} {'n':>3} {'max_gap':>14} {'bound':>14} {'ratio':>8} {'pass':>5}",
    ]
    for row in report.rows:
        lines.append(
            f"{row.discount:>9.2f} {row.n:>3d} {row.max_gap:>14.6e} "
            f"{row.bound:>14.6e} {row.worst_ratio:>8.4f} {str(row.passed):>5}"
        )
    lines.append(
        f"witness: gap={report.witness_gap:.9f} bound={report.witness_bound:.9f} "
        f"pass={report.witness_passed}"
    )
    lines.append(f"instances={report.instances} overall_pass={report.passed}")
    return "\n".join(lines)
