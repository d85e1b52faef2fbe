import pytest

from firewatch.dqn import TrainerConfig, run_training
from firewatch.env import SectorEnv


@pytest.fixture(scope="session")
def trained_three_node():
    """One full training run shared by the convergence/agreement checks."""
    env = SectorEnv(node_count=3)
    config = TrainerConfig(episodes=800, steps_per_episode=50, seed=0)
    net, metrics = run_training(env, config)
    return env, config, net, metrics
