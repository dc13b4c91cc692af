"""Episode record serialization: lossless round-trips and stable bytes."""

import random

from appraisal_rl.episodes import (
    load_episodes,
    trajectory_from_record,
    trajectory_to_record,
    write_episodes,
    write_episodes_atomic,
)
from appraisal_rl.lookahead import UserTransition
from appraisal_rl.rewards import TurnRewards

from conftest import synthetic_trajectory


def test_record_round_trip_is_lossless():
    rng = random.Random(31)
    for i in range(25):
        trajectory = synthetic_trajectory(rng, i)
        record = trajectory_to_record(trajectory)
        assert trajectory_from_record(record) == trajectory


def test_round_trip_with_rewards_and_lookahead():
    trajectory = synthetic_trajectory(random.Random(5), 0)
    turn = trajectory.turns[0]
    turn.rewards = TurnRewards(cog=0.75, arg=0.5, rp=0.25, overthink=0.0, total=1.5)
    turn.lookahead = (
        UserTransition("n1", "a1", "e1", 1),
        UserTransition("n2", "a2", "e2", 2),
    )
    trajectory.reward = 4.25
    trajectory.scored_by = {"judge": "scripted(judge, 3 lines, cycle=False)"}
    record = trajectory_to_record(trajectory)
    assert trajectory_from_record(record) == trajectory


def test_file_round_trip_and_byte_stability(tmp_path):
    rng = random.Random(77)
    trajectories = [synthetic_trajectory(rng, i) for i in range(10)]
    first = tmp_path / "episodes.jsonl"
    second = tmp_path / "episodes2.jsonl"
    assert write_episodes(str(first), trajectories) == 10
    assert load_episodes(str(first)) == trajectories
    write_episodes(str(second), load_episodes(str(first)))
    assert first.read_bytes() == second.read_bytes()


def test_atomic_rewrite(tmp_path):
    trajectories = [synthetic_trajectory(random.Random(1), 0)]
    path = tmp_path / "episodes.jsonl"
    write_episodes(str(path), trajectories)
    trajectories[0].reward = 2.5
    write_episodes_atomic(str(path), trajectories)
    assert load_episodes(str(path))[0].reward == 2.5
    assert not (tmp_path / "episodes.jsonl.tmp").exists()
