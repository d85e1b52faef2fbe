"""Telemetry domain types and the weighted risk-signal fusion.

Every subsystem (simulator, gateway, training environment) funnels node
readings through ``compute_signal`` so there is exactly one definition of
"how risky does this sector look".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

# BME280 / MQ2 / T1592 measurement ranges.
TEMP_MIN_C = -40.0
TEMP_MAX_C = 85.0
HUM_MIN_PCT = 0.0
HUM_MAX_PCT = 100.0
PRESSURE_MIN_HPA = 300.0
PRESSURE_MAX_HPA = 1100.0
ADC_MAX = 4095


class DomainError(ValueError):
    """A value violated a domain invariant (sensor range, empty input, ...)."""


@dataclass(frozen=True, order=True)
class NodeId:
    """Index and display label of one sensor node."""

    id: int
    label: str = ""

    def __post_init__(self):
        if self.id < 0:
            raise DomainError(f"node id must be non-negative, got {self.id}")
        if not self.label:
            # A, B, C ... fall back to N<i> past 26 nodes.
            object.__setattr__(
                self, "label", chr(ord("A") + self.id) if self.id < 26 else f"N{self.id}"
            )


@dataclass(frozen=True)
class SensorReading:
    """One timestamped environmental sample from a node."""

    node: NodeId
    timestamp_ms: int
    temperature_c: float
    humidity_pct: float
    pressure_hpa: float
    smoke_raw: int
    water_raw: int

    def __post_init__(self):
        _check_range("temperature_c", self.temperature_c, TEMP_MIN_C, TEMP_MAX_C)
        _check_range("humidity_pct", self.humidity_pct, HUM_MIN_PCT, HUM_MAX_PCT)
        _check_range("pressure_hpa", self.pressure_hpa, PRESSURE_MIN_HPA, PRESSURE_MAX_HPA)
        _check_range("smoke_raw", self.smoke_raw, 0, ADC_MAX)
        _check_range("water_raw", self.water_raw, 0, ADC_MAX)


@dataclass(frozen=True)
class FusionWeights:
    """Weights and exceedance thresholds for the risk-signal fusion.

    The default weights put most of the emphasis on the smoke channel; the
    temperature/humidity thresholds are fire-weather style defaults and are
    expected to be overridden per deployment via config.
    """

    w_smoke: float = 0.6
    w_temp: float = 0.3
    w_hum: float = 0.05
    temp_threshold_c: float = 35.0
    humidity_threshold_pct: float = 30.0

    def __post_init__(self):
        for name in ("w_smoke", "w_temp", "w_hum"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    @property
    def max_signal(self) -> float:
        return self.w_smoke + self.w_temp + self.w_hum

    @classmethod
    def from_dict(cls, d: dict) -> "FusionWeights":
        known = {"w_smoke", "w_temp", "w_hum", "temp_threshold_c", "humidity_threshold_pct"}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown fusion config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SectorSignal:
    """Fused per-node risk score plus the indicators it was built from."""

    node: NodeId
    smoke_pct: float
    temp_exceeded: int
    hum_exceeded: int
    signal: float


def smoke_pct_from_raw(raw: int) -> float:
    """Map an MQ2 ADC count (0..4095) onto a 0..100 percent scale."""
    if not 0 <= raw <= ADC_MAX:
        raise DomainError(f"smoke_raw out of range [0, {ADC_MAX}]: {raw}")
    return raw * 100.0 / ADC_MAX


def compute_signal(reading: SensorReading, weights: FusionWeights) -> SectorSignal:
    """Fuse one reading into the sector risk signal.

    The smoke percentage contributes continuously; temperature above its
    threshold and humidity *below* its threshold (dry air) each contribute
    a binary weighted term.
    """
    smoke_pct = smoke_pct_from_raw(reading.smoke_raw)
    temp_exceeded = 1 if reading.temperature_c > weights.temp_threshold_c else 0
    hum_exceeded = 1 if reading.humidity_pct < weights.humidity_threshold_pct else 0
    signal = (
        weights.w_smoke * (smoke_pct / 100.0)
        + weights.w_temp * temp_exceeded
        + weights.w_hum * hum_exceeded
    )
    return SectorSignal(
        node=reading.node,
        smoke_pct=smoke_pct,
        temp_exceeded=temp_exceeded,
        hum_exceeded=hum_exceeded,
        signal=signal,
    )


def rank_sectors(signals: list[SectorSignal]) -> NodeId:
    """Return the node with the strongest signal; ties go to the lowest id."""
    if not signals:
        raise DomainError("rank_sectors needs at least one signal")
    best = signals[0]
    for s in signals[1:]:
        if s.signal > best.signal or (s.signal == best.signal and s.node.id < best.node.id):
            best = s
    return best.node


def load_fusion_config(path: str | Path) -> FusionWeights:
    """Read FusionWeights from a JSON key/value config file."""
    with open(path, encoding="utf-8") as f:
        return FusionWeights.from_dict(json.load(f))


def _check_range(name, value, lo, hi):
    if not lo <= value <= hi:
        raise DomainError(f"{name} out of range [{lo}, {hi}]: {value}")
