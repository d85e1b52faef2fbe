"""The gateway: ingest telemetry, aim the camera, verify, alert.

One logical loop consumes an ordered event queue (sensor ticks, channel
deliveries, decision timers, verification completions, scenario events),
so a whole scenario run is a deterministic function of the script seed.
Wall-clock runs use the same loop with a sleeping clock and an optional
queue of operator-injected events.
"""

from __future__ import annotations

import heapq
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from firewatch.agent import SectorAgent
from firewatch.channel import transmit
from firewatch.clock import SimClock
from firewatch.env import encode_observations
from firewatch.fusion import (
    FusionWeights,
    NodeId,
    SectorSignal,
    SensorReading,
    compute_signal,
    rank_sectors,
    smoke_pct_from_raw,
)
from firewatch.simulate import (
    NodeSimulator,
    Scene,
    ScenarioEvent,
    ScenarioScript,
    node_distance_m,
)
from firewatch.verify import VerificationRequest, VerifierError, VerifierVerdict
from firewatch.wire import WireError, decode


@dataclass
class NodeState:
    """What the gateway currently believes about one node."""

    node: NodeId
    azimuth_deg: float
    last_reading: SensorReading | None = None
    last_seq: int = -1
    last_update_ms: int = -1
    rain: bool = False
    signal: SectorSignal | None = None


@dataclass
class CameraModel:
    """Pan camera with a finite rotation speed; azimuth stays in [0, 360)."""

    azimuth_deg: float = 0.0
    rotation_speed_deg_per_s: float = 60.0

    def __post_init__(self):
        if self.rotation_speed_deg_per_s <= 0:
            raise ValueError("rotation speed must be > 0")
        self.azimuth_deg %= 360.0

    def rotation_ms(self, target_deg: float) -> int:
        """Travel time along the shortest angular path."""
        delta = abs((target_deg - self.azimuth_deg + 180.0) % 360.0 - 180.0)
        return round(delta / self.rotation_speed_deg_per_s * 1000.0)

    def orient(self, target_deg: float, now_ms: int) -> int:
        """Rotate to the target; returns the completion timestamp."""
        done = now_ms + self.rotation_ms(target_deg)
        self.azimuth_deg = target_deg % 360.0
        return done


@dataclass(frozen=True)
class GatewayPolicy:
    decision_period_ms: int = 5000
    agent_checkpoint: str | None = None
    verification_trigger_signal: float = 0.0
    alert_cooldown_ms: int = 60_000
    staleness_ms: int = 10_000
    agent_decision_ms: int = 820
    verification_ms: int = 102_000
    dispatch_ms: int = 0
    rotation_speed_deg_per_s: float = 60.0
    initial_azimuth_deg: float = 0.0
    home_azimuth_deg: float | None = None
    dispatch_max_attempts: int = 5
    dispatch_backoff_ms: int = 100
    fusion: FusionWeights = field(default_factory=FusionWeights)

    def __post_init__(self):
        if self.decision_period_ms <= 0:
            raise ValueError("decision_period_ms must be > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "GatewayPolicy":
        d = dict(d)
        if "fusion" in d:
            d["fusion"] = FusionWeights.from_dict(d["fusion"])
        return cls(**d)


def load_policy(path: str | Path) -> GatewayPolicy:
    with open(path, encoding="utf-8") as f:
        return GatewayPolicy.from_dict(json.load(f))


@dataclass
class AlertEvent:
    """One verified alert with its full latency chain."""

    id: str
    node: NodeId
    azimuth_deg: float
    signal: float
    verdict: VerifierVerdict
    t_trigger_ms: int
    t_oriented_ms: int
    t_verified_ms: int
    t_dispatched_ms: int
    delivered: bool = False
    attempts: int = 0

    def __post_init__(self):
        chain = (self.t_trigger_ms, self.t_oriented_ms, self.t_verified_ms,
                 self.t_dispatched_ms)
        if any(b < a for a, b in zip(chain, chain[1:])):
            raise ValueError(f"alert timestamps must be monotone: {chain}")

    def webhook_body(self) -> dict:
        return {
            "alert_id": self.id,
            "node": self.node.id,
            "node_label": self.node.label,
            "azimuth_deg": self.azimuth_deg,
            "signal": self.signal,
            "t_trigger_ms": self.t_trigger_ms,
            "t_oriented_ms": self.t_oriented_ms,
            "t_verified_ms": self.t_verified_ms,
            "t_dispatched_ms": self.t_dispatched_ms,
            "verdict_cells": self.verdict.to_lists(),
        }


class MemorySink:
    """Collects alert bodies in memory; optionally fails the first n calls."""

    def __init__(self, fail_first: int = 0):
        self.deliveries: list[dict] = []
        self._failures_left = fail_first

    def deliver(self, body: dict):
        if self._failures_left > 0:
            self._failures_left -= 1
            raise ConnectionError("scripted sink failure")
        self.deliveries.append(body)


class WebhookSink:
    """POSTs alert bodies as JSON to a configured URL."""

    def __init__(self, url: str, timeout_s: float = 10.0):
        import requests

        self._requests = requests
        self.url = url
        self.timeout_s = timeout_s

    def deliver(self, body: dict):
        resp = self._requests.post(self.url, json=body, timeout=self.timeout_s)
        if resp.status_code >= 400:
            raise ConnectionError(f"webhook returned HTTP {resp.status_code}")


@dataclass(frozen=True)
class DeliveryReceipt:
    attempts: int
    delivered: bool


def dispatch_alert(body: dict, sink, max_attempts: int = 5,
                   backoff_ms: int = 100, sleep=time.sleep) -> DeliveryReceipt:
    """Deliver with exponential backoff; gives up after max_attempts."""
    for attempt in range(1, max_attempts + 1):
        try:
            sink.deliver(body)
            return DeliveryReceipt(attempts=attempt, delivered=True)
        except Exception:
            if attempt < max_attempts:
                sleep(backoff_ms * (2 ** (attempt - 1)) / 1000.0)
    return DeliveryReceipt(attempts=max_attempts, delivered=False)


class Gateway:
    """Per-node state plus the decide/orient logic, camera included."""

    def __init__(self, script: ScenarioScript, policy: GatewayPolicy,
                 agent: SectorAgent | None = None):
        if policy.agent_checkpoint and agent is None:
            agent = SectorAgent.from_checkpoint(policy.agent_checkpoint)
        self.policy = policy
        self.agent = agent
        self.camera = CameraModel(azimuth_deg=policy.initial_azimuth_deg,
                                  rotation_speed_deg_per_s=policy.rotation_speed_deg_per_s)
        self.nodes: dict[int, NodeState] = {
            p.node.id: NodeState(node=p.node, azimuth_deg=p.azimuth_deg)
            for p in script.placements
        }
        self.decode_errors = 0
        self.dropped_duplicates = 0

    def ingest(self, data: bytes, now_ms: int) -> NodeState | None:
        """Decode one uplink frame and fold it into node state.

        Duplicate or out-of-order sequence numbers never regress state;
        decode failures are counted and otherwise ignored.
        """
        try:
            msg = decode(data)
        except WireError:
            self.decode_errors += 1
            return None
        state = self.nodes.get(msg.node_id)
        if state is None:
            self.decode_errors += 1
            return None
        if msg.seq <= state.last_seq:
            self.dropped_duplicates += 1
            return None
        state.last_seq = msg.seq
        state.last_update_ms = now_ms
        if msg.is_rain:
            state.rain = True
        else:
            p = msg.payload
            state.rain = False
            state.last_reading = SensorReading(
                node=state.node,
                timestamp_ms=msg.timestamp_ms,
                temperature_c=p.temp_c,
                humidity_pct=p.humidity_pct,
                pressure_hpa=p.pressure_hpa,
                smoke_raw=p.smoke_raw,
                water_raw=p.water_raw,
            )
            state.signal = compute_signal(state.last_reading, self.policy.fusion)
        return state

    def eligible(self, now_ms: int) -> list[NodeState]:
        """Nodes that may be ranked: fresh, not rain-flagged, with a reading."""
        out = []
        for state in self.nodes.values():
            if state.rain or state.signal is None:
                continue
            if now_ms - state.last_update_ms > self.policy.staleness_ms:
                continue
            out.append(state)
        return out

    def decide(self, now_ms: int) -> NodeState | None:
        """Pick the sector to watch: greedy agent, or fusion-ranking fallback."""
        eligible = self.eligible(now_ms)
        if not eligible:
            return None
        if self.agent is not None:
            all_ids = sorted(self.nodes)
            eligible_ids = {s.node.id for s in eligible}
            observations = []
            for node_id in all_ids:
                s = self.nodes[node_id]
                if node_id in eligible_ids:
                    r = s.last_reading
                    observations.append(
                        (smoke_pct_from_raw(r.smoke_raw), r.temperature_c, r.humidity_pct))
                else:
                    # No usable evidence: encode as a floor-risk observation.
                    observations.append((0.0, 0.0, 100.0))
            q = self.agent.predict_q(encode_observations(observations))[0]
            # Greedy argmax restricted to eligible nodes, ties to lowest id.
            best = max(sorted(eligible_ids), key=lambda nid: (q[all_ids.index(nid)], -nid))
            return self.nodes[best]
        winner = rank_sectors([s.signal for s in eligible])
        return self.nodes[winner.id]


def _nearest_node(script: ScenarioScript, azimuth_deg: float, distance_m: float) -> int:
    from firewatch.simulate import FireSource

    probe = FireSource("probe", azimuth_deg, distance_m, 0.0)
    return min(script.placements, key=lambda p: node_distance_m(p, probe)).node.id


@dataclass
class PipelineResult:
    alerts: list[AlertEvent]
    trace_lines: list[str]
    gateway: Gateway


def run_pipeline(
    script: ScenarioScript,
    policy: GatewayPolicy,
    verifier,
    sink=None,
    clock=None,
    agent: SectorAgent | None = None,
    publish=None,
    control_queue=None,
) -> PipelineResult:
    """Run one scenario end to end; deterministic under the script seed.

    ``publish(kind, body)`` mirrors records to a telemetry service;
    ``control_queue`` feeds operator-injected ScenarioEvents into live runs.
    All timestamps come from ``clock`` (simulated by default).
    """
    clock = clock if clock is not None else SimClock()
    sink = sink if sink is not None else MemorySink()
    gateway = Gateway(script, policy, agent=agent)
    sim = NodeSimulator(script)
    scene = Scene()
    if hasattr(verifier, "bind_scene"):
        verifier.bind_scene(scene)
    rng = np.random.default_rng([script.seed, 0xC8A])  # channel substream
    trace: list[str] = []
    alerts: list[AlertEvent] = []
    counter = itertools.count()
    queue: list[tuple[int, int, str, object]] = []
    verifying = False

    def push(t_ms: int, kind: str, payload=None):
        if t_ms <= script.duration_ms:
            heapq.heappush(queue, (t_ms, next(counter), kind, payload))

    def log(t_ms: int, event: str, **fields):
        record = {"t": t_ms, "event": event, **fields}
        trace.append(json.dumps(record, separators=(",", ":")))
        if publish is not None and event in ("run_config", "scenario", "telemetry_rx",
                                             "decision", "orient", "verify_start",
                                             "verify_error", "verify_done", "alert"):
            publish("trace", record)

    log(0, "run_config",
        nodes=[{"id": p.node.id, "label": p.node.label,
                "azimuth_deg": p.azimuth_deg, "distance_m": p.distance_m}
               for p in script.placements],
        decision_period_ms=policy.decision_period_ms,
        initial_azimuth_deg=gateway.camera.azimuth_deg)

    period = script.environment.sampling_period_ms
    for p in script.placements:
        push(period, "sample", p.node.id)
    push(policy.decision_period_ms, "decide")
    for ev in script.events:
        push(ev.t_ms, "scenario", ev)

    def handle_sample(t_ms: int, node_id: int):
        msg = sim.tick(node_id, t_ms, scene.active_fires(), node_id in scene.rain)
        for deliver_at, data in transmit(msg, script.channel, rng, now_ms=t_ms):
            push(deliver_at, "deliver", data)
        push(t_ms + period, "sample", node_id)

    def handle_deliver(t_ms: int, data: bytes):
        state = gateway.ingest(data, t_ms)
        if state is None:
            log(t_ms, "telemetry_drop")
            return
        log(t_ms, "telemetry_rx", node=state.node.id, seq=state.last_seq,
            rain=state.rain,
            signal=round(state.signal.signal, 6) if state.signal else None)
        if publish is not None:
            publish("telemetry", json.loads(data))

    def handle_scenario(t_ms: int, ev: ScenarioEvent):
        from firewatch.simulate import ScenarioError

        try:
            scene.apply(ev)
        except ScenarioError as e:
            # Only reachable for operator-injected events; scripts validate upfront.
            log(t_ms, "scenario_error", kind=ev.kind, error=str(e))
            return
        fields = {"kind": ev.kind}
        for k in ("fire_id", "azimuth_deg", "distance_m", "intensity", "node_id"):
            if getattr(ev, k) is not None:
                fields[k] = getattr(ev, k)
        if ev.kind in ("place_fire", "move_fire"):
            fire = scene.fires[ev.fire_id]
            fields["nearest_node"] = _nearest_node(script, fire.azimuth_deg, fire.distance_m)
        log(t_ms, "scenario", **fields)

    def handle_decide(t_ms: int):
        nonlocal verifying
        push(t_ms + policy.decision_period_ms, "decide")
        if verifying:
            log(t_ms, "decision", node=None, reason="busy")
            return
        chosen = gateway.decide(t_ms)
        if chosen is None:
            log(t_ms, "decision", node=None, reason="no_eligible")
            return
        if chosen.signal.signal < policy.verification_trigger_signal:
            log(t_ms, "decision", node=None, reason="below_threshold",
                best_node=chosen.node.id, best_signal=round(chosen.signal.signal, 6))
            home = policy.home_azimuth_deg
            if home is not None and gateway.camera.azimuth_deg != home % 360.0:
                from_deg = gateway.camera.azimuth_deg
                rotation = gateway.camera.rotation_ms(home)
                gateway.camera.orient(home, t_ms)
                log(t_ms, "orient", from_deg=from_deg, to_deg=home % 360.0,
                    rotation_ms=rotation, reason="home")
            return
        mode = "agent" if gateway.agent is not None else "fallback"
        log(t_ms, "decision", node=chosen.node.id,
            signal=round(chosen.signal.signal, 6), mode=mode)
        decided_at = t_ms + policy.agent_decision_ms
        from_deg = gateway.camera.azimuth_deg
        rotation = gateway.camera.rotation_ms(chosen.azimuth_deg)
        gateway.camera.orient(chosen.azimuth_deg, decided_at)
        log(t_ms, "orient", from_deg=from_deg, to_deg=chosen.azimuth_deg,
            rotation_ms=rotation)
        t_oriented = decided_at + rotation
        verifying = True
        log(t_ms, "verify_start", node=chosen.node.id, t_oriented=t_oriented)
        push(t_oriented, "verify_capture",
             (chosen.node.id, chosen.signal.signal, t_ms, t_oriented))

    def handle_verify_capture(t_ms: int, payload):
        # Frames are captured the moment the camera is on target; the
        # verdict computed from them lands after the model's latency.
        nonlocal verifying
        node_id, signal_value, t_trigger, t_oriented = payload
        request = VerificationRequest(camera_azimuth_deg=gateway.camera.azimuth_deg,
                                      t_ms=t_oriented)
        try:
            verdict = verifier.verify(request)
        except VerifierError as e:
            verifying = False
            log(t_ms, "verify_error", node=node_id, error=str(e))
            return
        push(t_oriented + policy.verification_ms, "verify_done",
             (node_id, signal_value, t_trigger, t_oriented, verdict))

    def handle_verify_done(t_ms: int, payload):
        nonlocal verifying
        verifying = False
        node_id, signal_value, t_trigger, t_oriented, verdict = payload
        state = gateway.nodes[node_id]
        log(t_ms, "verify_done", node=node_id, overall=verdict.overall)
        if not verdict.overall:
            return
        last = last_alert_ms.get(node_id)
        if last is not None and t_ms + policy.dispatch_ms - last < policy.alert_cooldown_ms:
            log(t_ms, "alert_suppressed", node=node_id, reason="cooldown")
            return
        alert = AlertEvent(
            id=f"alert-{len(alerts) + 1}",
            node=state.node,
            azimuth_deg=state.azimuth_deg,
            signal=signal_value,
            verdict=verdict,
            t_trigger_ms=t_trigger,
            t_oriented_ms=t_oriented,
            t_verified_ms=t_ms,
            t_dispatched_ms=t_ms + policy.dispatch_ms,
        )
        last_alert_ms[node_id] = alert.t_dispatched_ms
        alerts.append(alert)
        push(alert.t_dispatched_ms, "dispatch", alert)

    def handle_dispatch(t_ms: int, alert: AlertEvent):
        receipt = dispatch_alert(alert.webhook_body(), sink,
                                 max_attempts=policy.dispatch_max_attempts,
                                 backoff_ms=policy.dispatch_backoff_ms,
                                 sleep=lambda s: None)
        alert.delivered = receipt.delivered
        alert.attempts = receipt.attempts
        log(t_ms, "alert", alert_id=alert.id, node=alert.node.id,
            azimuth_deg=alert.azimuth_deg, signal=alert.signal,
            t_trigger=alert.t_trigger_ms, t_oriented=alert.t_oriented_ms,
            t_verified=alert.t_verified_ms, t_dispatched=alert.t_dispatched_ms,
            delivered=alert.delivered, attempts=alert.attempts)
        if publish is not None:
            publish("alert", alert.webhook_body())

    last_alert_ms: dict[int, int] = {}
    handlers = {
        "sample": handle_sample,
        "deliver": handle_deliver,
        "scenario": handle_scenario,
        "decide": lambda t_ms, _payload: handle_decide(t_ms),
        "verify_capture": handle_verify_capture,
        "verify_done": handle_verify_done,
        "dispatch": handle_dispatch,
    }

    while queue:
        t_ms, _, kind, payload = heapq.heappop(queue)
        clock.advance_to(t_ms)
        if control_queue is not None:
            _drain_control(control_queue, t_ms, scene, push, log)
        handlers[kind](t_ms, payload)

    return PipelineResult(alerts=alerts, trace_lines=trace, gateway=gateway)


def _drain_control(control_queue, now_ms, scene, push, log):
    """Move operator-injected events into the event queue at the current time."""
    import queue as queue_mod

    while True:
        try:
            ev_dict = control_queue.get_nowait()
        except queue_mod.Empty:
            return
        ev = ScenarioEvent(
            t_ms=now_ms,
            kind=ev_dict.get("event", "<missing>"),
            fire_id=ev_dict.get("fire_id"),
            azimuth_deg=ev_dict.get("azimuth_deg"),
            distance_m=ev_dict.get("distance_m"),
            intensity=ev_dict.get("intensity"),
            node_id=ev_dict.get("node_id"),
        )
        push(now_ms, "scenario", ev)
