// Console entry point: wire the stream, the map, the charts, and the feed.

import { ApiClient } from "./api.js";
import { breakdown, formatSeconds, stagesSumToTotal } from "./breakdown.js";
import { renderNodeChart } from "./charts.js";
import { DeploymentMap } from "./map.js";
import { ConsoleState, applyRecord, initialState } from "./state.js";
import { StreamClient } from "./stream.js";

const params = new URLSearchParams(location.search);
const baseUrl = params.get("service") ?? `http://${location.hostname || "localhost"}:8787`;

const api = new ApiClient(baseUrl);
const state: ConsoleState = initialState();
let fireCounter = 0;

const el = {
  status: document.getElementById("status")!,
  map: document.getElementById("map") as HTMLCanvasElement,
  charts: document.getElementById("charts")!,
  feed: document.getElementById("feed")!,
  rainButtons: document.getElementById("rain-buttons")!,
  extinguishAll: document.getElementById("extinguish-all")!,
};

const map = new DeploymentMap(el.map, {
  onMapClicked: (azimuthDeg, distanceM) => {
    fireCounter += 1;
    api.injectEvent({
      event: "place_fire", fire_id: `ui-${Date.now()}-${fireCounter}`,
      azimuth_deg: round1(azimuthDeg), distance_m: round1(distanceM), intensity: 1.0,
    }).catch(showError);
  },
  onFireDragged: (fire, azimuthDeg, distanceM) => {
    api.injectEvent({
      event: "move_fire", fire_id: fire.fireId,
      azimuth_deg: round1(azimuthDeg), distance_m: round1(distanceM),
    }).catch(showError);
  },
});

el.extinguishAll.addEventListener("click", () => {
  for (const fire of state.fires.values()) {
    api.injectEvent({ event: "extinguish_fire", fire_id: fire.fireId }).catch(showError);
  }
});

function round1(v: number): number {
  return Math.round(v * 10) / 10;
}

function showError(err: unknown): void {
  el.status.textContent = `control error: ${err}`;
}

function renderRainButtons(): void {
  el.rainButtons.innerHTML = "";
  for (const node of [...state.nodes.values()].sort((a, b) => a.id - b.id)) {
    const button = document.createElement("button");
    button.textContent = node.rain ? `stop rain @ ${node.label}` : `rain @ ${node.label}`;
    button.addEventListener("click", () => {
      api.injectEvent({
        event: node.rain ? "rain_stop" : "rain_start", node_id: node.id,
      }).catch(showError);
    });
    el.rainButtons.appendChild(button);
  }
}

function renderFeed(): void {
  const rows = state.alerts
    .slice()
    .sort((a, b) => b.recordId - a.recordId)
    .map((alert) => {
      const b = breakdown(alert);
      const check = stagesSumToTotal(b) ? "" : " (inconsistent!)";
      return `<tr>
        <td>${alert.alertId}</td><td>${alert.nodeLabel}</td>
        <td>${alert.azimuthDeg.toFixed(0)}&deg;</td>
        <td>${alert.signal.toFixed(3)}</td>
        <td>${formatSeconds(b.orientationMs)}</td>
        <td>${formatSeconds(b.verificationMs)}</td>
        <td>${formatSeconds(b.dispatchMs)}</td>
        <td>${formatSeconds(b.totalMs)}${check}</td>
      </tr>`;
    });
  el.feed.innerHTML = rows.length
    ? `<table><thead><tr><th>alert</th><th>node</th><th>azimuth</th><th>signal</th>
       <th>orient</th><th>verify</th><th>dispatch</th><th>total</th></tr></thead>
       <tbody>${rows.join("")}</tbody></table>`
    : "<p class='empty'>no alerts yet</p>";
}

function renderCharts(): void {
  const nodes = [...state.nodes.values()].sort((a, b) => a.id - b.id);
  while (el.charts.children.length < nodes.length) {
    const canvas = document.createElement("canvas");
    canvas.width = 520;
    canvas.height = 120;
    el.charts.appendChild(canvas);
  }
  nodes.forEach((node, i) => {
    renderNodeChart(el.charts.children[i] as HTMLCanvasElement, node);
  });
}

let dirty = true;
function render(): void {
  if (dirty) {
    map.render(state);
    renderCharts();
    renderFeed();
    renderRainButtons();
    dirty = false;
  }
  requestAnimationFrame(render);
}

async function start(): Promise<void> {
  // Refresh-proof feed: rebuild it from the store before streaming.
  try {
    for (const row of await api.alertsSince(0)) {
      if (!state.alertIds.has(row.alertId)) {
        state.alertIds.add(row.alertId);
        state.alerts.push(row);
      }
    }
    for (const record of await api.recordsSince(0)) {
      if (record.kind !== "alert") applyRecord(state, record);
    }
  } catch (err) {
    console.warn("initial replay failed (service down?)", err);
  }
  dirty = true;

  const client = new StreamClient(`${baseUrl}/stream`, {
    onRecord: (record) => {
      applyRecord(state, record);
      dirty = true;
    },
    onStatus: (status) => {
      el.status.textContent = `${status} — ${baseUrl} — sim t=${(state.simTimeMs / 1000).toFixed(0)}s`;
    },
  });
  void client.run();
  render();
}

void start();
