"""Post-hoc analysis of pipeline trace logs.

Traces are line-delimited JSON. The functions here rebuild per-alert
latency breakdowns, check the monotonicity invariants, and produce the
per-node mean detection-time summary table for wheelbarrow-style runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class TraceError(ValueError):
    """A trace log is corrupt or violates ordering invariants."""


def parse_trace(lines) -> list[dict]:
    """Parse trace lines; problems are reported with their line number."""
    records = []
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(f"line {i}: corrupt trace record: {e.msg}") from e
        if not isinstance(rec, dict) or "t" not in rec or "event" not in rec:
            raise TraceError(f"line {i}: trace record needs 't' and 'event'")
        records.append(rec)
    return records


def load_trace(path: str | Path) -> list[dict]:
    return parse_trace(Path(path).read_text(encoding="utf-8").splitlines())


def check_ordering(records: list[dict]):
    """Trace timestamps must be non-decreasing; alert chains monotone."""
    last = None
    for i, rec in enumerate(records, start=1):
        if last is not None and rec["t"] < last:
            raise TraceError(f"record {i}: time goes backwards ({rec['t']} < {last})")
        last = rec["t"]
    for rec in records:
        if rec["event"] == "alert":
            chain = [rec["t_trigger"], rec["t_oriented"], rec["t_verified"],
                     rec["t_dispatched"]]
            if any(b < a for a, b in zip(chain, chain[1:])):
                raise TraceError(f"alert {rec.get('alert_id')}: timestamps not monotone: {chain}")


@dataclass(frozen=True)
class AlertBreakdown:
    alert_id: str
    node: int
    orientation_ms: int   # trigger -> camera on target (decision + rotation)
    verification_ms: int  # on target -> verdict
    dispatch_ms: int      # verdict -> delivered to the sink
    total_ms: int

    @property
    def stages_sum_ms(self) -> int:
        return self.orientation_ms + self.verification_ms + self.dispatch_ms


def alert_breakdowns(records: list[dict]) -> list[AlertBreakdown]:
    out = []
    for rec in records:
        if rec["event"] != "alert":
            continue
        out.append(AlertBreakdown(
            alert_id=rec["alert_id"],
            node=rec["node"],
            orientation_ms=rec["t_oriented"] - rec["t_trigger"],
            verification_ms=rec["t_verified"] - rec["t_oriented"],
            dispatch_ms=rec["t_dispatched"] - rec["t_verified"],
            total_ms=rec["t_dispatched"] - rec["t_trigger"],
        ))
    return out


def detection_times(records: list[dict]) -> dict[int, list[float]]:
    """Seconds from each fire placement/approach to its dispatched alert.

    An alert is attributed to the most recent fire event (place/move) whose
    nearest node matches the alerted node. Returns {node_id: [seconds...]}.
    """
    fire_events = [r for r in records if r["event"] == "scenario"
                   and r.get("kind") in ("place_fire", "move_fire")
                   and "nearest_node" in r]
    times: dict[int, list[float]] = {}
    for rec in records:
        if rec["event"] != "alert":
            continue
        candidates = [f for f in fire_events
                      if f["nearest_node"] == rec["node"] and f["t"] <= rec["t_trigger"]]
        if not candidates:
            continue
        start = max(candidates, key=lambda f: f["t"])
        times.setdefault(rec["node"], []).append((rec["t_dispatched"] - start["t"]) / 1000.0)
    return times


def summary_rows(records: list[dict], labels: dict[int, str] | None = None) -> list[dict]:
    """Per-node trial times and mean, in node-id order."""
    times = detection_times(records)
    rows = []
    for node_id in sorted(times):
        trials = times[node_id]
        rows.append({
            "node": node_id,
            "label": (labels or {}).get(node_id, str(node_id)),
            "trials": trials,
            "mean_s": sum(trials) / len(trials),
        })
    return rows


def format_summary_text(rows: list[dict]) -> str:
    if not rows:
        return "no alerts\n"
    n_trials = max(len(r["trials"]) for r in rows)
    headers = ["node"] + [f"t_{i + 1}" for i in range(n_trials)] + ["mean"]
    table = [headers]
    for r in rows:
        cells = [r["label"]]
        cells += [f"{t:.1f}" for t in r["trials"]]
        cells += [""] * (n_trials - len(r["trials"]))
        cells.append(f"{r['mean_s']:.1f}")
        table.append(cells)
    widths = [max(len(row[c]) for row in table) for c in range(len(headers))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table]
    return "\n".join(lines) + "\n"


def format_summary_csv(rows: list[dict]) -> str:
    if not rows:
        return "node,mean_s\n"
    n_trials = max(len(r["trials"]) for r in rows)
    header = "node," + ",".join(f"t_{i + 1}" for i in range(n_trials)) + ",mean_s"
    lines = [header]
    for r in rows:
        cells = [r["label"]]
        cells += [f"{t:.3f}" for t in r["trials"]]
        cells += [""] * (n_trials - len(r["trials"]))
        cells.append(f"{r['mean_s']:.3f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
