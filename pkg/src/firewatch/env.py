"""Sector-selection training environment.

Each step exactly one randomly chosen node runs "hot" (elevated smoke and
temperature, dry air) while the rest sit at quiet baselines. The agent is
rewarded for picking the node the fusion ranking would pick, so the fused
signal is the labeling oracle and the network has to learn the thresholds
from raw normalized observations.
"""

from __future__ import annotations

import numpy as np

from firewatch.fusion import (
    FusionWeights,
    NodeId,
    SensorReading,
    compute_signal,
    rank_sectors,
    smoke_pct_from_raw,
)
from firewatch import fusion


def encode_triple(smoke_pct: float, temperature_c: float, humidity_pct: float) -> list[float]:
    """Normalize one node's observation into the agent's [0, 1] features."""
    return [
        smoke_pct / 100.0,
        (temperature_c - fusion.TEMP_MIN_C) / (fusion.TEMP_MAX_C - fusion.TEMP_MIN_C),
        humidity_pct / 100.0,
    ]


def encode_observations(observations) -> np.ndarray:
    """Concatenate per-node (smoke_pct, temp_c, humidity_pct) triples.

    Node order is positional: entry i is node i. Missing nodes should be
    filled with zeros by the caller before encoding.
    """
    state = []
    for smoke_pct, temp_c, hum_pct in observations:
        state.extend(encode_triple(smoke_pct, temp_c, hum_pct))
    return np.array(state, dtype=float)


class SectorEnv:
    """Stochastic hot-node environment with fusion-oracle rewards."""

    def __init__(
        self,
        node_count: int = 3,
        steps_per_episode: int = 50,
        weights: FusionWeights | None = None,
        reward_correct: float = 5.0,
        reward_incorrect: float = -1.0,
        baseline_smoke_raw: tuple[int, int] = (0, 600),
        baseline_temp_c: tuple[float, float] = (15.0, 30.0),
        baseline_humidity_pct: tuple[float, float] = (40.0, 80.0),
        hot_smoke_raw: tuple[int, int] = (2200, 3900),
        hot_temp_c: tuple[float, float] = (38.0, 55.0),
        hot_humidity_pct: tuple[float, float] = (5.0, 25.0),
    ):
        if node_count < 2:
            raise ValueError("need at least 2 nodes for the task to be non-trivial")
        self.node_count = node_count
        self.steps_per_episode = steps_per_episode
        self.weights = weights if weights is not None else FusionWeights()
        self.reward_correct = reward_correct
        self.reward_incorrect = reward_incorrect
        self.baseline_smoke_raw = baseline_smoke_raw
        self.baseline_temp_c = baseline_temp_c
        self.baseline_humidity_pct = baseline_humidity_pct
        self.hot_smoke_raw = hot_smoke_raw
        self.hot_temp_c = hot_temp_c
        self.hot_humidity_pct = hot_humidity_pct
        self._steps = 0
        self._winner: int | None = None

    @property
    def state_dim(self) -> int:
        return 3 * self.node_count

    @property
    def action_count(self) -> int:
        return self.node_count

    def sample_state(self, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        """Draw one observation; returns (state_vector, oracle_winner)."""
        hot = int(rng.integers(self.node_count))
        observations = []
        signals = []
        for i in range(self.node_count):
            if i == hot:
                smoke_raw = int(rng.integers(self.hot_smoke_raw[0], self.hot_smoke_raw[1] + 1))
                temp = rng.uniform(*self.hot_temp_c)
                hum = rng.uniform(*self.hot_humidity_pct)
            else:
                smoke_raw = int(
                    rng.integers(self.baseline_smoke_raw[0], self.baseline_smoke_raw[1] + 1)
                )
                temp = rng.uniform(*self.baseline_temp_c)
                hum = rng.uniform(*self.baseline_humidity_pct)
            reading = SensorReading(
                node=NodeId(i),
                timestamp_ms=0,
                temperature_c=temp,
                humidity_pct=hum,
                pressure_hpa=900.0,
                smoke_raw=smoke_raw,
                water_raw=0,
            )
            observations.append((smoke_pct_from_raw(smoke_raw), temp, hum))
            signals.append(compute_signal(reading, self.weights))
        winner = rank_sectors(signals).id
        return encode_observations(observations), winner

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._steps = 0
        state, self._winner = self.sample_state(rng)
        return state

    def step(self, action: int, rng: np.random.Generator):
        """Score the action against the current state's oracle, then advance."""
        if self._winner is None:
            raise RuntimeError("call reset() before step()")
        if not 0 <= action < self.action_count:
            raise ValueError(f"action {action} out of range [0, {self.action_count})")
        reward = self.reward_correct if action == self._winner else self.reward_incorrect
        self._steps += 1
        terminal = self._steps >= self.steps_per_episode
        next_state, self._winner = self.sample_state(rng)
        return reward, next_state, terminal
