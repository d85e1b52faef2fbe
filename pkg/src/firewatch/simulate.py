"""Simulated sensor nodes and the physical scene that drives them.

A ScenarioScript is pure data: node placements around the gateway, an
environment model, and a time-ordered list of events (fires placed, moved,
extinguished; rain starting and stopping at nodes). Sampling is a pure
function of (seed, node, time, active scene), so identical scripts replay
byte-identically regardless of host or interleaving.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from firewatch.channel import ChannelModel
from firewatch.fusion import DomainError, NodeId, SensorReading
from firewatch import fusion
from firewatch.wire import FullPayload, RainPayload, TelemetryMessage

SCENARIO_VERSION = 1

EVENT_KINDS = ("place_fire", "move_fire", "extinguish_fire", "rain_start", "rain_stop")


class ScenarioError(ValueError):
    """Scenario script failed validation."""


@dataclass(frozen=True)
class NodePlacement:
    node: NodeId
    azimuth_deg: float
    distance_m: float

    def __post_init__(self):
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise DomainError(f"azimuth must be in [0, 360): {self.azimuth_deg}")
        if self.distance_m <= 0:
            raise DomainError(f"distance must be > 0: {self.distance_m}")


@dataclass(frozen=True)
class FireSource:
    id: str
    azimuth_deg: float
    distance_m: float
    intensity: float

    def __post_init__(self):
        if self.intensity < 0:
            raise DomainError(f"fire intensity must be >= 0: {self.intensity}")


@dataclass(frozen=True)
class ScenarioEvent:
    t_ms: int
    kind: str
    fire_id: str | None = None
    azimuth_deg: float | None = None
    distance_m: float | None = None
    intensity: float | None = None
    node_id: int | None = None


@dataclass(frozen=True)
class EnvironmentModel:
    """Baseline distributions plus the fire-to-smoke coupling.

    Smoke adds ``intensity * smoke_gain / (1 + d^2)`` ADC counts for each
    active fire at distance d meters from the node, clamped to the sensor
    range: monotone in intensity, decaying with distance.
    """

    temp_mean_c: float = 21.0
    temp_sigma: float = 0.5
    humidity_mean_pct: float = 40.0
    humidity_sigma: float = 1.0
    pressure_mean_hpa: float = 650.0
    pressure_sigma: float = 0.5
    smoke_baseline_raw: float = 120.0
    smoke_sigma: float = 10.0
    smoke_gain: float = 6000.0
    water_baseline_raw: int = 10
    rain_water_raw: int = 3000
    rain_threshold_raw: int = 2000
    sampling_period_ms: int = 1000

    def __post_init__(self):
        for name in ("temp_sigma", "humidity_sigma", "pressure_sigma", "smoke_sigma"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.sampling_period_ms <= 0:
            raise DomainError("sampling_period_ms must be > 0")

    def smoke_contribution(self, intensity: float, distance_m: float) -> float:
        return intensity * self.smoke_gain / (1.0 + distance_m**2)

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentModel":
        return cls(**d)


@dataclass(frozen=True)
class ScenarioScript:
    seed: int
    duration_ms: int
    placements: list[NodePlacement]
    events: list[ScenarioEvent] = field(default_factory=list)
    environment: EnvironmentModel = field(default_factory=EnvironmentModel)
    channel: ChannelModel = field(default_factory=ChannelModel)

    def __post_init__(self):
        ids = [p.node.id for p in self.placements]
        if len(set(ids)) != len(ids):
            raise ScenarioError(f"duplicate node ids: {sorted(ids)}")
        if any(t2.t_ms < t1.t_ms for t1, t2 in zip(self.events, self.events[1:])):
            raise ScenarioError("events must be sorted by t_ms")
        self._validate_event_references()

    def _validate_event_references(self):
        node_ids = {p.node.id for p in self.placements}
        live_fires: set[str] = set()
        for i, ev in enumerate(self.events):
            where = f"event {i} ({ev.kind} at t={ev.t_ms})"
            if ev.kind not in EVENT_KINDS:
                raise ScenarioError(f"{where}: unknown event kind")
            if ev.kind == "place_fire":
                if ev.fire_id in live_fires:
                    raise ScenarioError(f"{where}: fire {ev.fire_id!r} already placed")
                if None in (ev.fire_id, ev.azimuth_deg, ev.distance_m, ev.intensity):
                    raise ScenarioError(f"{where}: needs fire_id, azimuth_deg, distance_m, intensity")
                live_fires.add(ev.fire_id)
            elif ev.kind in ("move_fire", "extinguish_fire"):
                if ev.fire_id not in live_fires:
                    raise ScenarioError(f"{where}: fire {ev.fire_id!r} not placed")
                if ev.kind == "extinguish_fire":
                    live_fires.discard(ev.fire_id)
            else:  # rain events
                if ev.node_id not in node_ids:
                    raise ScenarioError(f"{where}: unknown node_id {ev.node_id}")

    def placement(self, node_id: int) -> NodePlacement:
        for p in self.placements:
            if p.node.id == node_id:
                return p
        raise DomainError(f"node {node_id} is not placed in this scenario")


def node_distance_m(placement: NodePlacement, fire: FireSource) -> float:
    """Distance between a node and a fire, both given in gateway polar coords."""
    a = math.radians(placement.azimuth_deg - fire.azimuth_deg)
    r1, r2 = placement.distance_m, fire.distance_m
    return math.sqrt(max(0.0, r1 * r1 + r2 * r2 - 2 * r1 * r2 * math.cos(a)))


def _sample_rng(seed: int, node_id: int, t_ms: int) -> np.random.Generator:
    # Keyed per (seed, node, tick) so samples are independent of call order.
    return np.random.default_rng([seed, node_id, t_ms])


def sample_reading(
    placement: NodePlacement,
    t_ms: int,
    env: EnvironmentModel,
    fires: list[FireSource],
    rng: np.random.Generator,
) -> SensorReading:
    """Gaussian baselines plus summed fire coupling, clamped to sensor ranges."""
    temp = _clamp(env.temp_mean_c + env.temp_sigma * rng.standard_normal(),
                  fusion.TEMP_MIN_C, fusion.TEMP_MAX_C)
    hum = _clamp(env.humidity_mean_pct + env.humidity_sigma * rng.standard_normal(),
                 fusion.HUM_MIN_PCT, fusion.HUM_MAX_PCT)
    pressure = _clamp(env.pressure_mean_hpa + env.pressure_sigma * rng.standard_normal(),
                      fusion.PRESSURE_MIN_HPA, fusion.PRESSURE_MAX_HPA)
    smoke = env.smoke_baseline_raw + env.smoke_sigma * rng.standard_normal()
    smoke += sum(env.smoke_contribution(f.intensity, node_distance_m(placement, f))
                 for f in fires)
    return SensorReading(
        node=placement.node,
        timestamp_ms=t_ms,
        temperature_c=round(temp, 2),
        humidity_pct=round(hum, 2),
        pressure_hpa=round(pressure, 2),
        smoke_raw=int(_clamp(round(smoke), 0, fusion.ADC_MAX)),
        water_raw=env.water_baseline_raw,
    )


class NodeSimulator:
    """Owns per-node metadata (sequence counters) and produces telemetry."""

    def __init__(self, script: ScenarioScript):
        self.script = script
        self._seq = {p.node.id: 0 for p in script.placements}

    def tick(self, node_id: int, t_ms: int, fires: list[FireSource],
             rain_active: bool) -> TelemetryMessage:
        """One sampling tick: a full reading, or a rain heartbeat while wet."""
        placement = self.script.placement(node_id)
        seq = self._seq[node_id]
        self._seq[node_id] = seq + 1
        if rain_active:
            payload: FullPayload | RainPayload = RainPayload(
                water_raw=self.script.environment.rain_water_raw
            )
        else:
            rng = _sample_rng(self.script.seed, node_id, t_ms)
            r = sample_reading(placement, t_ms, self.script.environment, fires, rng)
            payload = FullPayload(
                temp_c=r.temperature_c,
                humidity_pct=r.humidity_pct,
                pressure_hpa=r.pressure_hpa,
                smoke_raw=r.smoke_raw,
                water_raw=r.water_raw,
            )
        return TelemetryMessage(node_id=node_id, seq=seq, timestamp_ms=t_ms, payload=payload)


class Scene:
    """Mutable world state evolved by scenario events."""

    def __init__(self):
        self.fires: dict[str, FireSource] = {}
        self.rain: set[int] = set()

    def active_fires(self) -> list[FireSource]:
        return list(self.fires.values())

    def apply(self, ev: ScenarioEvent):
        if ev.kind == "place_fire":
            self.fires[ev.fire_id] = FireSource(ev.fire_id, ev.azimuth_deg,
                                                ev.distance_m, ev.intensity)
        elif ev.kind == "move_fire":
            if ev.fire_id not in self.fires:
                raise ScenarioError(f"cannot move unknown fire {ev.fire_id!r}")
            old = self.fires[ev.fire_id]
            self.fires[ev.fire_id] = replace(
                old,
                azimuth_deg=ev.azimuth_deg if ev.azimuth_deg is not None else old.azimuth_deg,
                distance_m=ev.distance_m if ev.distance_m is not None else old.distance_m,
                intensity=ev.intensity if ev.intensity is not None else old.intensity,
            )
        elif ev.kind == "extinguish_fire":
            if ev.fire_id not in self.fires:
                raise ScenarioError(f"cannot extinguish unknown fire {ev.fire_id!r}")
            del self.fires[ev.fire_id]
        elif ev.kind == "rain_start":
            self.rain.add(ev.node_id)
        elif ev.kind == "rain_stop":
            self.rain.discard(ev.node_id)
        else:
            raise ScenarioError(f"unknown event kind {ev.kind!r}")


def load_scenario(path: str | Path) -> ScenarioScript:
    """Parse a scenario file; JSON errors surface with line numbers."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: line {e.lineno}: {e.msg}") from e
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict) -> ScenarioScript:
    version = doc.get("scenario_version")
    if version != SCENARIO_VERSION:
        raise ScenarioError(f"scenario_version must be {SCENARIO_VERSION}, got {version!r}")
    try:
        placements = [
            NodePlacement(
                node=NodeId(n["id"], n.get("label", "")),
                azimuth_deg=float(n["azimuth_deg"]),
                distance_m=float(n["distance_m"]),
            )
            for n in doc["nodes"]
        ]
        events = [
            ScenarioEvent(
                t_ms=int(e["t_ms"]),
                kind=e["event"],
                fire_id=e.get("fire_id"),
                azimuth_deg=_opt_float(e, "azimuth_deg"),
                distance_m=_opt_float(e, "distance_m"),
                intensity=_opt_float(e, "intensity"),
                node_id=e.get("node_id"),
            )
            for e in doc.get("events", [])
        ]
        return ScenarioScript(
            seed=int(doc["seed"]),
            duration_ms=int(doc["duration_ms"]),
            placements=placements,
            events=events,
            environment=EnvironmentModel.from_dict(doc.get("environment", {})),
            channel=ChannelModel.from_dict(doc.get("channel", {})),
        )
    except (KeyError, TypeError) as e:
        raise ScenarioError(f"scenario is missing or mistypes a field: {e}") from e


def scenario_to_dict(script: ScenarioScript) -> dict:
    events = []
    for ev in script.events:
        d = {"t_ms": ev.t_ms, "event": ev.kind}
        for k in ("fire_id", "azimuth_deg", "distance_m", "intensity", "node_id"):
            if getattr(ev, k) is not None:
                d[k] = getattr(ev, k)
        events.append(d)
    return {
        "scenario_version": SCENARIO_VERSION,
        "seed": script.seed,
        "duration_ms": script.duration_ms,
        "nodes": [
            {"id": p.node.id, "label": p.node.label, "azimuth_deg": p.azimuth_deg,
             "distance_m": p.distance_m}
            for p in script.placements
        ],
        "environment": {k: getattr(script.environment, k)
                        for k in EnvironmentModel.__dataclass_fields__},
        "channel": {k: getattr(script.channel, k)
                    for k in ChannelModel.__dataclass_fields__},
        "events": events,
    }


def save_scenario(script: ScenarioScript, path: str | Path):
    Path(path).write_text(json.dumps(scenario_to_dict(script), indent=2) + "\n",
                          encoding="utf-8")


def _opt_float(d, key):
    return float(d[key]) if key in d and d[key] is not None else None


def _clamp(v, lo, hi):
    return max(lo, min(hi, v))
