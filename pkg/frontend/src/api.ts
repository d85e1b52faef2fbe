// REST calls against the telemetry service. Each operator action maps to
// exactly one POST /control/event request.

import { AlertRow, ControlEvent, StoredRecord } from "./types.js";
import { alertRowFromRecord } from "./state.js";

export class ApiClient {
  constructor(public baseUrl: string, private fetchImpl: typeof fetch = fetch) {}

  private async getJson(path: string): Promise<Record<string, unknown>> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) throw new Error(`GET ${path}: HTTP ${resp.status}`);
    return (await resp.json()) as Record<string, unknown>;
  }

  /** Full alert feed since a record id; since_id=0 rebuilds it from scratch. */
  async alertsSince(sinceId = 0): Promise<AlertRow[]> {
    const body = await this.getJson(`/alerts?since_id=${sinceId}`);
    const records = (body.alerts ?? []) as StoredRecord[];
    const rows: AlertRow[] = [];
    for (const record of records) {
      const row = alertRowFromRecord(record);
      if (row !== null) rows.push(row);
    }
    return rows;
  }

  async recordsSince(sinceId = 0): Promise<StoredRecord[]> {
    const body = await this.getJson(`/records?since_id=${sinceId}`);
    return (body.records ?? []) as StoredRecord[];
  }

  async nodes(): Promise<Record<string, unknown>> {
    const body = await this.getJson("/nodes");
    return (body.nodes ?? {}) as Record<string, unknown>;
  }

  /** One user action, one request. 202 means the simulation accepted it. */
  async injectEvent(event: ControlEvent): Promise<void> {
    const resp = await this.fetchImpl(this.baseUrl + "/control/event", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(event),
    });
    if (resp.status !== 202) {
      const detail = await resp.text();
      throw new Error(`control event rejected (HTTP ${resp.status}): ${detail}`);
    }
  }
}
