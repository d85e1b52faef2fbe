// Shapes of the records the telemetry service serves. The console renders
// only what arrives over the wire; nothing is simulated client-side.

export interface StoredRecord {
  id: number;
  kind: "telemetry" | "alert" | "trace";
  received_at_ms: number;
  body: Record<string, unknown>;
}

export interface AlertRow {
  recordId: number;
  alertId: string;
  node: number;
  nodeLabel: string;
  azimuthDeg: number;
  signal: number;
  tTriggerMs: number;
  tOrientedMs: number;
  tVerifiedMs: number;
  tDispatchedMs: number;
}

export interface SeriesPoint {
  tMs: number;
  tempC: number;
  humidityPct: number;
  smokeRaw: number;
}

export interface NodeView {
  id: number;
  label: string;
  azimuthDeg: number | null;
  distanceM: number | null;
  rain: boolean;
  signal: number | null;
  lastSeenMs: number | null;
  series: SeriesPoint[];
}

export interface FireMarker {
  fireId: string;
  azimuthDeg: number;
  distanceM: number;
  intensity: number;
}

export type ControlEvent =
  | { event: "place_fire"; fire_id: string; azimuth_deg: number; distance_m: number; intensity: number }
  | { event: "move_fire"; fire_id: string; azimuth_deg?: number; distance_m?: number; intensity?: number }
  | { event: "extinguish_fire"; fire_id: string }
  | { event: "rain_start"; node_id: number }
  | { event: "rain_stop"; node_id: number };

export function isStoredRecord(value: unknown): value is StoredRecord {
  if (typeof value !== "object" || value === null) return false;
  const r = value as Record<string, unknown>;
  return (
    typeof r.id === "number" &&
    (r.kind === "telemetry" || r.kind === "alert" || r.kind === "trace") &&
    typeof r.body === "object" &&
    r.body !== null
  );
}
