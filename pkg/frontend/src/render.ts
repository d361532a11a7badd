/** Canvas rendering of the latest bridge state.
 *
 * Draws the exhibition floor (anchors, bounds), the current app's view
 * (home tiles, calibration prompt, target game), the live cursor, and a
 * dwell ring that fills over the click window and completes at dwell = 1.
 */

import { physicalToCanvas } from "./steering.js";
import type { BridgeStatus, StateMessage, Tile } from "./types.js";

const COLORS = {
  background: "#101418",
  border: "#2e3a46",
  anchor: "#e0a437",
  tile: "#1d2935",
  tileHover: "#2f4964",
  tileText: "#dce6f0",
  cursor: "#6fd3ff",
  ring: "#6fd3ff",
  target: "#5ad18c",
  text: "#aab8c5",
  banner: "#c0392b",
};

export function dwellRingAngle(dwell: number): number {
  const clamped = Math.min(Math.max(dwell, 0), 1);
  return clamped * 2 * Math.PI;
}

function drawTiles(ctx: CanvasRenderingContext2D, tiles: Tile[]): void {
  ctx.font = "20px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const tile of tiles) {
    const [x, y, w, h] = tile.rect;
    ctx.fillStyle = tile.hover ? COLORS.tileHover : COLORS.tile;
    ctx.fillRect(x, y, w, h);
    ctx.strokeStyle = COLORS.border;
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = COLORS.tileText;
    ctx.fillText(tile.name, x + w / 2, y + h / 2);
  }
}

function drawCursor(
  ctx: CanvasRenderingContext2D,
  cursor: [number, number],
  dwell: number,
): void {
  const [x, y] = cursor;
  ctx.strokeStyle = COLORS.cursor;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(x - 12, y);
  ctx.lineTo(x + 12, y);
  ctx.moveTo(x, y - 12);
  ctx.lineTo(x, y + 12);
  ctx.stroke();
  const angle = dwellRingAngle(dwell);
  if (angle > 0) {
    ctx.strokeStyle = COLORS.ring;
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.arc(x, y, 18, -Math.PI / 2, -Math.PI / 2 + angle);
    ctx.stroke();
  }
}

export function render(
  ctx: CanvasRenderingContext2D,
  state: StateMessage | null,
  status: BridgeStatus,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);

  if (state === null) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "24px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for the exhibition bridge...", width / 2, height / 2);
    drawBanner(ctx, status, width);
    return;
  }

  ctx.strokeStyle = COLORS.border;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);

  for (const anchor of state.anchors ?? []) {
    const [ax, ay] = physicalToCanvas(
      anchor[0],
      anchor[1],
      state.canvas,
      state.bounds,
    );
    ctx.fillStyle = COLORS.anchor;
    ctx.beginPath();
    ctx.arc(ax, ay, 7, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (state.app === "home") {
    drawTiles(ctx, (state.payload.tiles as Tile[] | undefined) ?? []);
  } else if (state.app === "calibrate") {
    ctx.fillStyle = COLORS.text;
    ctx.font = "26px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(String(state.payload.prompt ?? ""), width / 2, height / 3);
    ctx.fillText(
      `stage: ${String(state.payload.stage ?? "?")}`,
      width / 2,
      height / 3 + 40,
    );
  } else if (state.app === "target-touch") {
    const target = state.payload.target as [number, number] | null;
    const radius = Number(state.payload.radius ?? 50);
    if (target) {
      ctx.strokeStyle = COLORS.target;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.arc(target[0], target[1], radius, 0, 2 * Math.PI);
      ctx.stroke();
    }
    ctx.fillStyle = COLORS.text;
    ctx.font = "22px system-ui, sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(`score: ${String(state.payload.score ?? 0)}`, 16, 32);
  }

  drawCursor(ctx, state.cursor, state.dwell);
  drawBanner(ctx, status, width);
}

function drawBanner(
  ctx: CanvasRenderingContext2D,
  status: BridgeStatus,
  width: number,
): void {
  if (status === "open") {
    return;
  }
  ctx.fillStyle = COLORS.banner;
  ctx.fillRect(0, 0, width, 28);
  ctx.fillStyle = "#ffffff";
  ctx.font = "16px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(
    status === "connecting" ? "connecting to bridge..." : "bridge lost, reconnecting...",
    width / 2,
    14,
  );
}
