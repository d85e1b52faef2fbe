// Polar deployment map: gateway at the center, nodes on their bearings,
// the camera's field-of-view arc, and draggable fire markers.

import { ConsoleState } from "./state.js";
import { FireMarker } from "./types.js";

const FOV_DEG = 62;

export interface MapCallbacks {
  onFireDragged: (fire: FireMarker, azimuthDeg: number, distanceM: number) => void;
  onMapClicked: (azimuthDeg: number, distanceM: number) => void;
}

export class DeploymentMap {
  private dragging: string | null = null;
  private maxRangeM = 6;

  constructor(private canvas: HTMLCanvasElement, private callbacks: MapCallbacks) {
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
  }

  private center(): { cx: number; cy: number; scale: number } {
    const cx = this.canvas.width / 2;
    const cy = this.canvas.height / 2;
    const scale = (Math.min(cx, cy) - 18) / this.maxRangeM;
    return { cx, cy, scale };
  }

  private toXY(azimuthDeg: number, distanceM: number): { x: number; y: number } {
    const { cx, cy, scale } = this.center();
    const theta = ((azimuthDeg - 90) * Math.PI) / 180; // 0 deg points up
    return { x: cx + Math.cos(theta) * distanceM * scale,
             y: cy + Math.sin(theta) * distanceM * scale };
  }

  private toPolar(x: number, y: number): { azimuthDeg: number; distanceM: number } {
    const { cx, cy, scale } = this.center();
    const dx = x - cx;
    const dy = y - cy;
    const azimuthDeg = ((Math.atan2(dy, dx) * 180) / Math.PI + 90 + 360) % 360;
    const distanceM = Math.max(0.2, Math.hypot(dx, dy) / scale);
    return { azimuthDeg, distanceM };
  }

  private eventXY(e: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: ((e.clientX - rect.left) / rect.width) * this.canvas.width,
             y: ((e.clientY - rect.top) / rect.height) * this.canvas.height };
  }

  private hitFire(state: ConsoleState, x: number, y: number): FireMarker | null {
    for (const fire of state.fires.values()) {
      const p = this.toXY(fire.azimuthDeg, fire.distanceM);
      if (Math.hypot(p.x - x, p.y - y) < 14) return fire;
    }
    return null;
  }

  private lastState: ConsoleState | null = null;

  private pointerDown(e: PointerEvent): void {
    if (!this.lastState) return;
    const { x, y } = this.eventXY(e);
    const fire = this.hitFire(this.lastState, x, y);
    if (fire) {
      this.dragging = fire.fireId;
      this.canvas.setPointerCapture(e.pointerId);
    }
  }

  private pointerMove(_e: PointerEvent): void {
    // Position updates render only when the simulation echoes the move.
  }

  private pointerUp(e: PointerEvent): void {
    if (!this.lastState) return;
    const { x, y } = this.eventXY(e);
    const polar = this.toPolar(x, y);
    if (this.dragging) {
      const fire = this.lastState.fires.get(this.dragging);
      this.dragging = null;
      if (fire) this.callbacks.onFireDragged(fire, polar.azimuthDeg, polar.distanceM);
    } else if (this.hitFire(this.lastState, x, y) === null) {
      this.callbacks.onMapClicked(polar.azimuthDeg, polar.distanceM);
    }
  }

  render(state: ConsoleState): void {
    this.lastState = state;
    const distances = [...state.nodes.values()]
      .map((n) => n.distanceM ?? 0)
      .concat([...state.fires.values()].map((f) => f.distanceM));
    this.maxRangeM = Math.max(6, ...distances.map((d) => d * 1.3));

    const ctx = this.canvas.getContext("2d")!;
    const { cx, cy, scale } = this.center();
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    ctx.strokeStyle = "#2c3e50";
    ctx.fillStyle = "#95a5a6";
    ctx.font = "11px sans-serif";
    for (const ringM of [this.maxRangeM / 2, this.maxRangeM]) {
      ctx.beginPath();
      ctx.arc(cx, cy, ringM * scale, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.fillText(`${ringM.toFixed(1)}m`, cx + ringM * scale + 3, cy - 3);
    }

    if (state.cameraHeadingDeg !== null) {
      const from = ((state.cameraHeadingDeg - FOV_DEG / 2 - 90) * Math.PI) / 180;
      const to = ((state.cameraHeadingDeg + FOV_DEG / 2 - 90) * Math.PI) / 180;
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.arc(cx, cy, this.maxRangeM * scale, from, to);
      ctx.closePath();
      ctx.fillStyle = "rgba(241, 196, 15, 0.18)";
      ctx.fill();
      ctx.strokeStyle = "#f1c40f";
      ctx.stroke();
    }

    ctx.fillStyle = "#ecf0f1";
    ctx.beginPath();
    ctx.arc(cx, cy, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText("gateway", cx + 8, cy + 4);

    for (const node of state.nodes.values()) {
      if (node.azimuthDeg === null || node.distanceM === null) continue;
      const p = this.toXY(node.azimuthDeg, node.distanceM);
      ctx.beginPath();
      ctx.arc(p.x, p.y, 8, 0, 2 * Math.PI);
      ctx.fillStyle = node.rain ? "#7f8c8d" : riskColor(node.signal ?? 0);
      ctx.fill();
      ctx.strokeStyle = "#ecf0f1";
      ctx.stroke();
      ctx.fillStyle = "#ecf0f1";
      const tag = node.rain ? `${node.label} (rain)` : node.label;
      ctx.fillText(tag, p.x + 10, p.y + 4);
    }

    for (const fire of state.fires.values()) {
      const p = this.toXY(fire.azimuthDeg, fire.distanceM);
      ctx.font = "16px sans-serif";
      ctx.fillText("\u{1F525}", p.x - 8, p.y + 6);
      ctx.font = "11px sans-serif";
    }
  }
}

function riskColor(signal: number): string {
  if (signal >= 0.5) return "#e74c3c";
  if (signal >= 0.3) return "#e67e22";
  if (signal >= 0.1) return "#f1c40f";
  return "#2ecc71";
}
