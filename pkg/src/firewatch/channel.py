"""Lossy, latent, unacknowledged uplink channel.

Models the LPWAN hop between nodes and the gateway: a message is dropped,
delivered once after a sampled latency, or delivered twice (duplicate).
Payloads are never corrupted. All randomness comes from the caller's
generator, drawn in a fixed order, so runs replay exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from firewatch.wire import TelemetryMessage, encode


@dataclass(frozen=True)
class ChannelModel:
    loss_probability: float = 0.0
    latency_min_ms: int = 50
    latency_max_ms: int = 50
    duplicate_probability: float = 0.0

    def __post_init__(self):
        for name in ("loss_probability", "duplicate_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if not 0 <= self.latency_min_ms <= self.latency_max_ms:
            raise ValueError("need 0 <= latency_min_ms <= latency_max_ms")

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelModel":
        return cls(**d)


def transmit(
    msg: TelemetryMessage,
    channel: ChannelModel,
    rng: np.random.Generator,
    now_ms: int = 0,
) -> list[tuple[int, bytes]]:
    """Send one message; returns (deliver_at_ms, bytes) pairs.

    Zero pairs means the uplink lost the frame, two means it was duplicated.
    Duplicates sample an independent latency, so arrival order is not
    guaranteed to match send order.
    """
    if rng.random() < channel.loss_probability:
        return []
    data = encode(msg)
    deliveries = [(now_ms + _latency(channel, rng), data)]
    if rng.random() < channel.duplicate_probability:
        deliveries.append((now_ms + _latency(channel, rng), data))
    return deliveries


def _latency(channel: ChannelModel, rng: np.random.Generator) -> int:
    return int(rng.integers(channel.latency_min_ms, channel.latency_max_ms + 1))
