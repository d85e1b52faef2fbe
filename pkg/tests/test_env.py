import numpy as np
import pytest

from firewatch.env import SectorEnv, encode_observations, encode_triple


def test_encode_triple_normalization():
    assert encode_triple(0.0, -40.0, 0.0) == [0.0, 0.0, 0.0]
    assert encode_triple(100.0, 85.0, 100.0) == [1.0, 1.0, 1.0]
    assert encode_triple(50.0, 22.5, 40.0) == [0.5, 0.5, 0.4]


def test_encode_observations_concatenates_in_node_order():
    state = encode_observations([(100.0, 85.0, 100.0), (0.0, -40.0, 0.0)])
    assert np.array_equal(state, [1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def test_state_dimensions_and_bounds():
    env = SectorEnv(node_count=4)
    rng = np.random.default_rng(0)
    state = env.reset(rng)
    assert state.shape == (12,)
    assert env.action_count == 4
    for _ in range(200):
        assert np.all(state >= 0.0) and np.all(state <= 1.0)
        _, state, _ = env.step(0, rng)


def test_reward_is_plus5_for_oracle_winner_else_minus1():
    env = SectorEnv(node_count=3, steps_per_episode=1000)
    rng = np.random.default_rng(1)
    env.reset(rng)
    seen = set()
    for _ in range(300):
        winner = env._winner
        rewards = {}
        for action in range(3):
            probe = SectorEnv(node_count=3)
            probe._winner = winner
            probe._steps = 0
            rewards[action] = probe.step(action, np.random.default_rng(0))[0]
        assert rewards[winner] == 5.0
        assert all(r == -1.0 for a, r in rewards.items() if a != winner)
        seen.add(winner)
        env.step(0, rng)
    assert seen == {0, 1, 2}  # every node gets its turn as the hot one


def test_hot_node_is_oracle_winner():
    # The hot node's smoke floor alone outweighs the baseline ceiling.
    env = SectorEnv(node_count=3)
    rng = np.random.default_rng(2)
    for _ in range(100):
        state, winner = env.sample_state(rng)
        smoke = state.reshape(3, 3)[:, 0]
        assert winner == int(np.argmax(smoke))


def test_episode_terminates_at_step_budget():
    env = SectorEnv(node_count=2, steps_per_episode=5)
    rng = np.random.default_rng(3)
    env.reset(rng)
    flags = [env.step(0, rng)[2] for _ in range(5)]
    assert flags == [False, False, False, False, True]


def test_step_before_reset_raises():
    env = SectorEnv(node_count=2)
    with pytest.raises(RuntimeError):
        env.step(0, np.random.default_rng(0))


def test_invalid_action_rejected():
    env = SectorEnv(node_count=2)
    rng = np.random.default_rng(0)
    env.reset(rng)
    with pytest.raises(ValueError):
        env.step(5, rng)
