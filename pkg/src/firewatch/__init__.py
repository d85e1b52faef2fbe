"""firewatch: a deterministic, desk-scale wildfire-monitoring control plane.

Simulated IoT sensor nodes report over a lossy LPWAN-style channel to a
gateway whose DQN agent aims a modeled pan camera at the highest-risk
sector; a pluggable vision verifier confirms smoke/fire before alerts are
persisted and dispatched.
"""

from firewatch.fusion import (
    FusionWeights,
    NodeId,
    SectorSignal,
    SensorReading,
    compute_signal,
    rank_sectors,
    smoke_pct_from_raw,
)

__version__ = "0.1.0"

__all__ = [
    "FusionWeights",
    "NodeId",
    "SectorSignal",
    "SensorReading",
    "compute_signal",
    "rank_sectors",
    "smoke_pct_from_raw",
    "__version__",
]


def __getattr__(name):
    # Heavier subsystems load lazily so `import firewatch` stays cheap.
    if name in ("SectorAgent",):
        from firewatch.agent import SectorAgent
        return SectorAgent
    if name in ("SectorEnv",):
        from firewatch.env import SectorEnv
        return SectorEnv
    if name in ("run_pipeline", "GatewayPolicy"):
        from firewatch import gateway
        return getattr(gateway, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
