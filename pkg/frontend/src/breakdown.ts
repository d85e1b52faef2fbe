// Per-alert latency decomposition shown in the feed. The three stages
// telescope, so they must sum exactly to the total.

import { AlertRow } from "./types.js";

export interface LatencyBreakdown {
  orientationMs: number;   // trigger -> camera on target
  verificationMs: number;  // on target -> verdict
  dispatchMs: number;      // verdict -> delivered
  totalMs: number;
}

export function breakdown(alert: AlertRow): LatencyBreakdown {
  return {
    orientationMs: alert.tOrientedMs - alert.tTriggerMs,
    verificationMs: alert.tVerifiedMs - alert.tOrientedMs,
    dispatchMs: alert.tDispatchedMs - alert.tVerifiedMs,
    totalMs: alert.tDispatchedMs - alert.tTriggerMs,
  };
}

export function stagesSumToTotal(b: LatencyBreakdown): boolean {
  return b.orientationMs + b.verificationMs + b.dispatchMs === b.totalMs;
}

export function isMonotone(alert: AlertRow): boolean {
  return (
    alert.tTriggerMs <= alert.tOrientedMs &&
    alert.tOrientedMs <= alert.tVerifiedMs &&
    alert.tVerifiedMs <= alert.tDispatchedMs
  );
}

export function formatSeconds(ms: number): string {
  return (ms / 1000).toFixed(2) + "s";
}
