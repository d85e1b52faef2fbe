// Console state and the reducer that folds stream records into it.
// Updates are serialized: one record at a time, in store order.

import {
  AlertRow,
  FireMarker,
  NodeView,
  SeriesPoint,
  StoredRecord,
  isStoredRecord,
} from "./types.js";

export const SERIES_CAPACITY = 600;

export interface ConsoleState {
  lastRecordId: number;
  nodes: Map<number, NodeView>;
  cameraHeadingDeg: number | null;
  decisionPeriodMs: number | null;
  fires: Map<string, FireMarker>;
  alerts: AlertRow[];
  alertIds: Set<string>;
  simTimeMs: number;
  skippedRecords: number;
}

export function initialState(): ConsoleState {
  return {
    lastRecordId: 0,
    nodes: new Map(),
    cameraHeadingDeg: null,
    decisionPeriodMs: null,
    fires: new Map(),
    alerts: [],
    alertIds: new Set(),
    simTimeMs: 0,
    skippedRecords: 0,
  };
}

function nodeView(state: ConsoleState, id: number): NodeView {
  let node = state.nodes.get(id);
  if (!node) {
    node = { id, label: String(id), azimuthDeg: null, distanceM: null,
             rain: false, signal: null, lastSeenMs: null, series: [] };
    state.nodes.set(id, node);
  }
  return node;
}

export function alertRowFromRecord(record: StoredRecord): AlertRow | null {
  const b = record.body as Record<string, unknown>;
  if (typeof b.alert_id !== "string" || typeof b.node !== "number") return null;
  return {
    recordId: record.id,
    alertId: b.alert_id,
    node: b.node,
    nodeLabel: typeof b.node_label === "string" ? b.node_label : String(b.node),
    azimuthDeg: Number(b.azimuth_deg ?? 0),
    signal: Number(b.signal ?? 0),
    tTriggerMs: Number(b.t_trigger_ms ?? 0),
    tOrientedMs: Number(b.t_oriented_ms ?? b.t_trigger_ms ?? 0),
    tVerifiedMs: Number(b.t_verified_ms ?? b.t_dispatched_ms ?? 0),
    tDispatchedMs: Number(b.t_dispatched_ms ?? 0),
  };
}

/** Fold one stream record into the state. Malformed input is counted and
 *  skipped with a console warning, never thrown. */
export function applyRecord(state: ConsoleState, raw: unknown): void {
  if (!isStoredRecord(raw)) {
    state.skippedRecords += 1;
    console.warn("console: skipping malformed record", raw);
    return;
  }
  const record = raw;
  if (record.id <= state.lastRecordId) return; // replay/duplicate
  state.lastRecordId = record.id;

  if (record.kind === "telemetry") {
    applyTelemetry(state, record.body as Record<string, unknown>);
  } else if (record.kind === "alert") {
    const row = alertRowFromRecord(record);
    if (row === null) {
      state.skippedRecords += 1;
      console.warn("console: skipping malformed alert record", record);
      return;
    }
    if (!state.alertIds.has(row.alertId)) {  // reconnects must not duplicate rows
      state.alertIds.add(row.alertId);
      state.alerts.push(row);
    }
  } else {
    applyTrace(state, record.body as Record<string, unknown>);
  }
}

function applyTelemetry(state: ConsoleState, b: Record<string, unknown>): void {
  if (typeof b.node_id !== "number" || typeof b.ts !== "number") {
    state.skippedRecords += 1;
    console.warn("console: skipping malformed telemetry record", b);
    return;
  }
  const node = nodeView(state, b.node_id);
  node.lastSeenMs = b.ts;
  state.simTimeMs = Math.max(state.simTimeMs, b.ts);
  if (b.rain === true) {
    node.rain = true;
    return;
  }
  node.rain = false;
  const point: SeriesPoint = {
    tMs: b.ts,
    tempC: Number(b.temp_c ?? NaN),
    humidityPct: Number(b.humidity_pct ?? NaN),
    smokeRaw: Number(b.smoke_raw ?? NaN),
  };
  node.series.push(point);
  if (node.series.length > SERIES_CAPACITY) {
    node.series.splice(0, node.series.length - SERIES_CAPACITY);
  }
}

function applyTrace(state: ConsoleState, b: Record<string, unknown>): void {
  const event = b.event;
  if (typeof b.t === "number") state.simTimeMs = Math.max(state.simTimeMs, b.t);
  if (event === "run_config") {
    const nodes = Array.isArray(b.nodes) ? b.nodes : [];
    for (const entry of nodes) {
      const n = entry as Record<string, unknown>;
      if (typeof n.id !== "number") continue;
      const node = nodeView(state, n.id);
      node.label = typeof n.label === "string" ? n.label : node.label;
      node.azimuthDeg = Number(n.azimuth_deg ?? NaN);
      node.distanceM = Number(n.distance_m ?? NaN);
    }
    if (typeof b.decision_period_ms === "number") {
      state.decisionPeriodMs = b.decision_period_ms;
    }
    if (typeof b.initial_azimuth_deg === "number") {
      state.cameraHeadingDeg = b.initial_azimuth_deg;
    }
  } else if (event === "telemetry_rx") {
    if (typeof b.node === "number") {
      const node = nodeView(state, b.node);
      if (typeof b.signal === "number") node.signal = b.signal;
      if (typeof b.rain === "boolean") node.rain = b.rain;
    }
  } else if (event === "orient") {
    if (typeof b.to_deg === "number") state.cameraHeadingDeg = b.to_deg;
  } else if (event === "scenario") {
    applyScenario(state, b);
  }
}

function applyScenario(state: ConsoleState, b: Record<string, unknown>): void {
  const kind = b.kind;
  if (kind === "place_fire" || kind === "move_fire") {
    if (typeof b.fire_id !== "string") return;
    const existing = state.fires.get(b.fire_id);
    state.fires.set(b.fire_id, {
      fireId: b.fire_id,
      azimuthDeg: Number(b.azimuth_deg ?? existing?.azimuthDeg ?? 0),
      distanceM: Number(b.distance_m ?? existing?.distanceM ?? 0),
      intensity: Number(b.intensity ?? existing?.intensity ?? 1),
    });
  } else if (kind === "extinguish_fire") {
    if (typeof b.fire_id === "string") state.fires.delete(b.fire_id);
  } else if (kind === "rain_start" || kind === "rain_stop") {
    if (typeof b.node_id === "number") {
      nodeView(state, b.node_id).rain = kind === "rain_start";
    }
  }
}
