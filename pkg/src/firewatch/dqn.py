"""Deep Q-learning for sector selection: network, replay buffer, trainer.

The Q-network is a small fully-connected net (two ReLU hidden layers of 24
units, identity output) trained with plain SGD on the squared TD error.
Targets are treated as constants: gradients flow only through the predicted
Q-value of the action actually taken. Everything is seeded and deterministic.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT = "firewatch-qnet"
CHECKPOINT_VERSION = 1


@dataclass
class QNetwork:
    """Fully-connected Q-value function.

    ``weights[k]`` has shape (fan_in, fan_out); hidden layers use ReLU, the
    output layer is linear so Q-values are unbounded.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def init(cls, layer_sizes: list[int], rng: np.random.Generator) -> "QNetwork":
        """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights=weights, biases=biases)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def action_count(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def forward(net: QNetwork, state) -> np.ndarray:
    """Q-values for one state vector."""
    return forward_batch(net, np.asarray(state, dtype=float).reshape(1, -1))[0]


def forward_batch(net: QNetwork, states: np.ndarray) -> np.ndarray:
    """Q-values for a batch of states, shape (n, action_count)."""
    h = np.asarray(states, dtype=float)
    if h.ndim != 2 or h.shape[1] != net.input_dim:
        raise ValueError(f"state dim {h.shape} does not match network input {net.input_dim}")
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(0.0, h @ w + b)
    return h @ net.weights[-1] + net.biases[-1]


def select_action(net: QNetwork, state, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action: random with prob epsilon, else argmax Q.

    Ties in the greedy branch break toward the lowest action index.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(net.action_count))
    return int(np.argmax(forward(net, state)))


def td_target(reward: float, next_state, terminal: bool, net: QNetwork, gamma: float) -> float:
    """Bootstrapped target: reward, plus discounted best next Q unless terminal."""
    if terminal:
        return float(reward)
    return float(reward + gamma * np.max(forward(net, next_state)))


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring of transitions; overwrites oldest when full."""

    def __init__(self, capacity: int = 100_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._ring: list[Transition] = []
        self._next = 0

    def __len__(self):
        return len(self._ring)

    def push(self, transition: Transition):
        if len(self._ring) < self.capacity:
            self._ring.append(transition)
        else:
            self._ring[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._ring):
            raise ValueError(f"cannot sample {batch_size} from buffer of {len(self._ring)}")
        idx = rng.choice(len(self._ring), size=batch_size, replace=False)
        return [self._ring[i] for i in idx]


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters for the sector-selection trainer."""

    alpha: float = 0.001
    gamma: float = 0.75
    batch_size: int = 64
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_min: float = 0.01
    reward_correct: float = 5.0
    reward_incorrect: float = -1.0
    buffer_capacity: int = 100_000
    episodes: int = 800
    steps_per_episode: int = 50
    hidden_sizes: tuple[int, ...] = (24, 24)
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if not 0.0 <= self.epsilon_min <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_min <= epsilon_start <= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainerConfig":
        d = dict(d)
        if "hidden_sizes" in d:
            d["hidden_sizes"] = tuple(d["hidden_sizes"])
        return cls(**d)


@dataclass
class TrainingMetrics:
    """Per-episode rewards, their moving average, and per-update losses."""

    episode_rewards: list[float] = field(default_factory=list)
    moving_avg: list[float] = field(default_factory=list)
    episode_mean_losses: list[float] = field(default_factory=list)
    update_losses: list[float] = field(default_factory=list)


def moving_average(rewards: list[float], w: int = 100) -> list[float]:
    """Windowed mean; positions before a full window average what exists."""
    if w < 1:
        raise ValueError("window must be >= 1")
    out = []
    csum = np.concatenate([[0.0], np.cumsum(rewards)])
    for t in range(1, len(rewards) + 1):
        lo = max(0, t - w)
        out.append(float(csum[t] - csum[lo]) / (t - lo))
    return out


def _forward_cached(net: QNetwork, states: np.ndarray):
    """Forward pass keeping post-activation values for backprop."""
    activations = [states]
    h = states
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(0.0, h @ w + b)
        activations.append(h)
    q = h @ net.weights[-1] + net.biases[-1]
    return q, activations


def batch_gradients(net: QNetwork, states, actions, targets):
    """Loss and parameter gradients of the mean squared TD error.

    Only the Q-value of each taken action contributes; targets are constants.
    Returns (loss, dWs, dbs) with gradients matching net layer shapes.
    """
    states = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=int)
    targets = np.asarray(targets, dtype=float)
    n = states.shape[0]
    q, activations = _forward_cached(net, states)
    q_taken = q[np.arange(n), actions]
    err = q_taken - targets
    loss = float(np.mean(err**2))

    # dL/dq is nonzero only at the taken actions.
    dq = np.zeros_like(q)
    dq[np.arange(n), actions] = 2.0 * err / n

    dWs = [np.empty(0)] * len(net.weights)
    dbs = [np.empty(0)] * len(net.biases)
    delta = dq
    for k in range(len(net.weights) - 1, -1, -1):
        dWs[k] = activations[k].T @ delta
        dbs[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ net.weights[k].T) * (activations[k] > 0)
    return loss, dWs, dbs


def train_batch(net: QNetwork, batch: list[Transition], config: TrainerConfig) -> float:
    """One SGD step on a batch; returns the pre-step MSE loss."""
    if not batch:
        raise ValueError("train_batch needs a non-empty batch")
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=int)
    rewards = np.array([t.reward for t in batch], dtype=float)
    next_states = np.stack([t.next_state for t in batch])
    terminals = np.array([t.terminal for t in batch], dtype=bool)

    q_next = forward_batch(net, next_states).max(axis=1)
    targets = rewards + config.gamma * q_next * ~terminals

    loss, dWs, dbs = batch_gradients(net, states, actions, targets)
    for k in range(len(net.weights)):
        net.weights[k] -= config.alpha * dWs[k]
        net.biases[k] -= config.alpha * dbs[k]
    return loss


def run_training(env, config: TrainerConfig) -> tuple[QNetwork, TrainingMetrics]:
    """Train a fresh network on ``env`` with epsilon-greedy exploration.

    ``env`` must expose ``state_dim``, ``action_count``, ``reset(rng)`` and
    ``step(action, rng) -> (reward, next_state, terminal)``.
    """
    rng = np.random.default_rng(config.seed)
    layer_sizes = [env.state_dim, *config.hidden_sizes, env.action_count]
    net = QNetwork.init(layer_sizes, rng)
    metrics = TrainingMetrics()
    if config.episodes == 0:
        return net, metrics

    buffer = ReplayBuffer(config.buffer_capacity)
    epsilon = config.epsilon_start
    for _ in range(config.episodes):
        state = env.reset(rng)
        total = 0.0
        losses = []
        for _ in range(config.steps_per_episode):
            action = select_action(net, state, epsilon, rng)
            reward, next_state, terminal = env.step(action, rng)
            buffer.push(Transition(state, action, reward, next_state, terminal))
            total += reward
            if len(buffer) >= config.batch_size:
                losses.append(train_batch(net, buffer.sample(config.batch_size, rng), config))
            state = next_state
            if terminal:
                break
        epsilon = max(config.epsilon_min, epsilon * config.epsilon_decay)
        metrics.episode_rewards.append(total)
        metrics.episode_mean_losses.append(float(np.mean(losses)) if losses else 0.0)
        metrics.update_losses.extend(losses)
    metrics.moving_avg = moving_average(metrics.episode_rewards, 100)
    return net, metrics


def save_checkpoint(net: QNetwork, path: str | Path):
    """Write the network as versioned JSON (row-major weight matrices)."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": net.layer_sizes,
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> QNetwork:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} checkpoint: {path}")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
    weights = [np.array(layer["weights"], dtype=float) for layer in doc["layers"]]
    biases = [np.array(layer["biases"], dtype=float) for layer in doc["layers"]]
    net = QNetwork(weights=weights, biases=biases)
    if net.layer_sizes != doc["layer_sizes"]:
        raise ValueError("checkpoint layer_sizes do not match stored matrices")
    return net


def write_metrics_csv(metrics: TrainingMetrics, path: str | Path):
    """CSV export with columns episode, reward, moving_avg, mean_loss."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["episode", "reward", "moving_avg", "mean_loss"])
        for i, (r, ma, ml) in enumerate(
            zip(metrics.episode_rewards, metrics.moving_avg, metrics.episode_mean_losses)
        ):
            writer.writerow([i, repr(r), repr(ma), repr(ml)])
