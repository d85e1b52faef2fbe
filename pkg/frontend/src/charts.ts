// Minimal canvas strip charts for the per-node sensor series.

import { NodeView, SeriesPoint } from "./types.js";

interface Channel {
  label: string;
  color: string;
  min: number;
  max: number;
  pick: (p: SeriesPoint) => number;
}

const CHANNELS: Channel[] = [
  { label: "temp C", color: "#e74c3c", min: -40, max: 85, pick: (p) => p.tempC },
  { label: "hum %", color: "#3498db", min: 0, max: 100, pick: (p) => p.humidityPct },
  { label: "smoke", color: "#f39c12", min: 0, max: 4095, pick: (p) => p.smokeRaw },
];

export function renderNodeChart(canvas: HTMLCanvasElement, node: NodeView): void {
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.font = "11px sans-serif";

  ctx.fillStyle = "#ecf0f1";
  const title = node.rain ? `node ${node.label} — rain, data halted` : `node ${node.label}`;
  ctx.fillText(title, 6, 12);
  const latest = node.series[node.series.length - 1];
  if (latest) {
    ctx.fillStyle = "#95a5a6";
    ctx.fillText(
      `t=${(latest.tMs / 1000).toFixed(0)}s  ${latest.tempC.toFixed(1)}C  ` +
      `${latest.humidityPct.toFixed(0)}%  smoke ${latest.smokeRaw.toFixed(0)}` +
      (node.signal !== null ? `  signal ${node.signal.toFixed(3)}` : ""),
      6, height - 6,
    );
  } else if (!node.rain) {
    ctx.fillStyle = "#7f8c8d";
    ctx.fillText("no data yet", 6, height / 2);
  }
  if (node.series.length < 2) return;

  const top = 18;
  const bottom = height - 18;
  const points = node.series;
  const t0 = points[0].tMs;
  const t1 = points[points.length - 1].tMs;
  const span = Math.max(1, t1 - t0);

  for (const chan of CHANNELS) {
    ctx.strokeStyle = chan.color;
    ctx.beginPath();
    points.forEach((p, i) => {
      const x = 4 + ((p.tMs - t0) / span) * (width - 8);
      const frac = (chan.pick(p) - chan.min) / (chan.max - chan.min);
      const y = bottom - Math.max(0, Math.min(1, frac)) * (bottom - top);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  let legendX = width - 150;
  for (const chan of CHANNELS) {
    ctx.fillStyle = chan.color;
    ctx.fillText(chan.label, legendX, 12);
    legendX += 50;
  }
}
