"""Scikit-learn style front end for the sector-selection agent.

``SectorAgent`` exposes the trainer through the familiar estimator surface
(``fit`` / ``predict`` / ``get_params``) so it can be cloned, grid-searched,
and scored like any other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from firewatch.dqn import (
    QNetwork,
    TrainerConfig,
    TrainingMetrics,
    forward_batch,
    load_checkpoint,
    run_training,
)


def check_state_matrix(X, expected_dim: int | None = None) -> np.ndarray:
    """Validate a batch of agent state vectors; accepts a single vector too."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    X = check_array(X, dtype=float, ensure_2d=True)
    if expected_dim is not None and X.shape[1] != expected_dim:
        raise ValueError(f"expected state dimension {expected_dim}, got {X.shape[1]}")
    return X


class SectorAgent(BaseEstimator):
    """DQN sector-selection policy with an sklearn estimator API.

    Parameters mirror the trainer hyperparameters; ``fit`` trains on an
    environment object (``reset``/``step``), ``predict`` returns greedy
    actions for a matrix of state vectors.
    """

    def __init__(
        self,
        alpha=0.001,
        gamma=0.75,
        batch_size=64,
        epsilon_start=1.0,
        epsilon_decay=0.995,
        epsilon_min=0.01,
        reward_correct=5.0,
        reward_incorrect=-1.0,
        buffer_capacity=100_000,
        episodes=800,
        steps_per_episode=50,
        hidden_sizes=(24, 24),
        seed=0,
    ):
        self.alpha = alpha
        self.gamma = gamma
        self.batch_size = batch_size
        self.epsilon_start = epsilon_start
        self.epsilon_decay = epsilon_decay
        self.epsilon_min = epsilon_min
        self.reward_correct = reward_correct
        self.reward_incorrect = reward_incorrect
        self.buffer_capacity = buffer_capacity
        self.episodes = episodes
        self.steps_per_episode = steps_per_episode
        self.hidden_sizes = hidden_sizes
        self.seed = seed

    def _config(self) -> TrainerConfig:
        return TrainerConfig(
            alpha=self.alpha,
            gamma=self.gamma,
            batch_size=self.batch_size,
            epsilon_start=self.epsilon_start,
            epsilon_decay=self.epsilon_decay,
            epsilon_min=self.epsilon_min,
            reward_correct=self.reward_correct,
            reward_incorrect=self.reward_incorrect,
            buffer_capacity=self.buffer_capacity,
            episodes=self.episodes,
            steps_per_episode=self.steps_per_episode,
            hidden_sizes=tuple(self.hidden_sizes),
            seed=self.seed,
        )

    def fit(self, env, y=None):
        """Train on an environment; returns self."""
        self.network_, self.metrics_ = run_training(env, self._config())
        return self

    @classmethod
    def from_checkpoint(cls, path) -> "SectorAgent":
        """Build a ready-to-predict agent around a saved network."""
        agent = cls()
        agent.network_ = load_checkpoint(path)
        agent.metrics_ = TrainingMetrics()
        return agent

    @property
    def network(self) -> QNetwork:
        check_is_fitted(self, "network_")
        return self.network_

    def predict_q(self, X) -> np.ndarray:
        """Q-values per action for each row of X."""
        check_is_fitted(self, "network_")
        X = check_state_matrix(X, self.network_.input_dim)
        return forward_batch(self.network_, X)

    def predict(self, X) -> np.ndarray:
        """Greedy action indices (ties to the lowest index)."""
        return np.argmax(self.predict_q(X), axis=1)

    def score(self, X, y) -> float:
        """Fraction of states where the greedy action matches the label."""
        y = np.asarray(y, dtype=int)
        return float(np.mean(self.predict(X) == y))
