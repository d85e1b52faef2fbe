"""Bit-exact telemetry wire format.

Messages are canonical JSON objects with a fixed key order so that encoding
is byte-reproducible and tests can compare raw frames. Fixed-point fields
(temperature, humidity, pressure) are rendered with exactly two decimals,
which matches the sensors' resolution; a ``v`` key is reserved for future
schema versions (absent means v1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from firewatch import fusion


class WireError(ValueError):
    """Raised when bytes cannot be decoded into a valid telemetry message."""


@dataclass(frozen=True)
class FullPayload:
    """A complete environmental sample."""

    temp_c: float
    humidity_pct: float
    pressure_hpa: float
    smoke_raw: int
    water_raw: int


@dataclass(frozen=True)
class RainPayload:
    """Rain-flagged heartbeat: the node withholds environmental data."""

    water_raw: int


@dataclass(frozen=True)
class TelemetryMessage:
    node_id: int
    seq: int
    timestamp_ms: int
    payload: FullPayload | RainPayload

    @property
    def is_rain(self) -> bool:
        return isinstance(self.payload, RainPayload)


_FULL_KEYS = {"node_id", "seq", "ts", "temp_c", "humidity_pct", "pressure_hpa",
              "smoke_raw", "water_raw"}
_RAIN_KEYS = {"node_id", "seq", "ts", "rain", "water_raw"}


def encode(msg: TelemetryMessage) -> bytes:
    """Canonical JSON encoding with fixed key order."""
    head = f'{{"node_id":{msg.node_id},"seq":{msg.seq},"ts":{msg.timestamp_ms},'
    p = msg.payload
    if isinstance(p, RainPayload):
        body = f'"rain":true,"water_raw":{p.water_raw}}}'
    else:
        body = (
            f'"temp_c":{p.temp_c:.2f},"humidity_pct":{p.humidity_pct:.2f},'
            f'"pressure_hpa":{p.pressure_hpa:.2f},"smoke_raw":{p.smoke_raw},'
            f'"water_raw":{p.water_raw}}}'
        )
    return (head + body).encode("ascii")


def decode(data: bytes) -> TelemetryMessage:
    """Parse and validate wire bytes; inverse of :func:`encode`."""
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise WireError(f"malformed JSON: {e}") from e
    if not isinstance(obj, dict):
        raise WireError("telemetry message must be a JSON object")

    if obj.get("v", 1) != 1:
        raise WireError(f"unsupported wire version: {obj['v']}")
    obj.pop("v", None)

    keys = set(obj)
    if keys == _RAIN_KEYS:
        if obj["rain"] is not True:
            raise WireError("rain: heartbeat must carry rain=true")
        water = _check_int(obj, "water_raw", 0, fusion.ADC_MAX)
        payload: FullPayload | RainPayload = RainPayload(water_raw=water)
    elif keys == _FULL_KEYS:
        payload = FullPayload(
            temp_c=_check_num(obj, "temp_c", fusion.TEMP_MIN_C, fusion.TEMP_MAX_C),
            humidity_pct=_check_num(obj, "humidity_pct", fusion.HUM_MIN_PCT, fusion.HUM_MAX_PCT),
            pressure_hpa=_check_num(obj, "pressure_hpa", fusion.PRESSURE_MIN_HPA,
                                    fusion.PRESSURE_MAX_HPA),
            smoke_raw=_check_int(obj, "smoke_raw", 0, fusion.ADC_MAX),
            water_raw=_check_int(obj, "water_raw", 0, fusion.ADC_MAX),
        )
    else:
        unknown = keys - _FULL_KEYS - _RAIN_KEYS
        if unknown:
            raise WireError(f"unknown keys: {sorted(unknown)}")
        missing = min(_FULL_KEYS - keys, _RAIN_KEYS - keys, key=len)
        raise WireError(f"missing keys: {sorted(missing)}")

    return TelemetryMessage(
        node_id=_check_int(obj, "node_id", 0, None),
        seq=_check_int(obj, "seq", 0, None),
        timestamp_ms=_check_int(obj, "ts", 0, None),
        payload=payload,
    )


def _check_int(obj, key, lo, hi):
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise WireError(f"{key}: expected integer, got {v!r}")
    if v < lo or (hi is not None and v > hi):
        raise WireError(f"{key}: {v} out of range [{lo}, {hi}]")
    return v


def _check_num(obj, key, lo, hi):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise WireError(f"{key}: expected number, got {v!r}")
    if not lo <= v <= hi:
        raise WireError(f"{key}: {v} out of range [{lo}, {hi}]")
    return float(v)
