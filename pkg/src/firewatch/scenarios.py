"""Canned scenario builders.

The wheelbarrow run reproduces the field experiment layout: three nodes
around the gateway, a fire repeatedly brought up next to each node in
turn, and component delays configured to the measured values (agent
decision 0.82 s, verification 102 s). With the camera homing to 0 between
trials at 10 deg/s, the rotation legs alone separate the per-node alert
times: 30deg -> +3.0 s, 74deg -> +7.4 s, 148deg -> +14.8 s on top of the
common 115.0 s path.
"""

from __future__ import annotations

from firewatch.channel import ChannelModel
from firewatch.fusion import NodeId
from firewatch.gateway import GatewayPolicy
from firewatch.simulate import (
    EnvironmentModel,
    NodePlacement,
    ScenarioEvent,
    ScenarioScript,
)

WHEELBARROW_AZIMUTHS = {"A": 30.0, "B": 74.0, "C": 148.0}

# Fire placements sit on a 12.5 s decision grid such that the next
# decision tick lands exactly 12.18 s after each placement: sample tick
# (<= 1 s) plus channel latency (0.2 s) always beats it.
_DECISION_PERIOD_MS = 12_500
_FIRE_PHASE_MS = 320
_TRIAL_SPACING_MS = 150_000
_FIRST_TRIAL_MS = 50_320
_EXTINGUISH_AFTER_MS = 60_000


def wheelbarrow_scenario(trials_per_node: int = 5, seed: int = 2024) -> ScenarioScript:
    placements = [
        NodePlacement(NodeId(i, label), azimuth_deg=az, distance_m=3.0)
        for i, (label, az) in enumerate(WHEELBARROW_AZIMUTHS.items())
    ]
    assert _FIRST_TRIAL_MS % _DECISION_PERIOD_MS == _FIRE_PHASE_MS
    assert _TRIAL_SPACING_MS % _DECISION_PERIOD_MS == 0

    events = []
    t = _FIRST_TRIAL_MS
    for trial in range(trials_per_node):
        for p in placements:
            fire_id = f"wheelbarrow-{p.node.label}{trial + 1}"
            events.append(ScenarioEvent(
                t_ms=t, kind="place_fire", fire_id=fire_id,
                azimuth_deg=p.azimuth_deg, distance_m=p.distance_m, intensity=1.0,
            ))
            events.append(ScenarioEvent(
                t_ms=t + _EXTINGUISH_AFTER_MS, kind="extinguish_fire", fire_id=fire_id,
            ))
            t += _TRIAL_SPACING_MS
    events.sort(key=lambda e: e.t_ms)

    return ScenarioScript(
        seed=seed,
        duration_ms=t + 50_000,
        placements=placements,
        events=events,
        environment=EnvironmentModel(sampling_period_ms=1000),
        channel=ChannelModel(loss_probability=0.0, latency_min_ms=200,
                             latency_max_ms=200, duplicate_probability=0.0),
    )


def wheelbarrow_policy() -> GatewayPolicy:
    return GatewayPolicy(
        decision_period_ms=_DECISION_PERIOD_MS,
        verification_trigger_signal=0.3,
        alert_cooldown_ms=60_000,
        staleness_ms=10_000,
        agent_decision_ms=820,
        verification_ms=102_000,
        dispatch_ms=0,
        rotation_speed_deg_per_s=10.0,
        initial_azimuth_deg=0.0,
        home_azimuth_deg=0.0,
    )
