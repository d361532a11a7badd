/** Steering model: pointer and keyboard input to physical-frame targets.
 *
 * The pointer position is mapped back through the canvas calibration (the
 * inverse of the PCA's physical-to-pixel transform); arrow keys move the
 * target with a constant velocity. Targets are clamped to the calibrated
 * bounds and outgoing steer messages are throttled to at most 30 Hz.
 */

import type { CanvasSize, PhysicalBounds } from "./types.js";

export const MAX_STEER_HZ = 30;
export const KEY_SPEED_M_S = 1.5;

export function clampToBounds(
  x: number,
  y: number,
  bounds: PhysicalBounds,
): [number, number] {
  return [
    Math.min(Math.max(x, bounds.x_min), bounds.x_max),
    Math.min(Math.max(y, bounds.y_min), bounds.y_max),
  ];
}

/** Inverse of the PCA mapping: canvas pixels to physical meters. */
export function canvasToPhysical(
  px: number,
  py: number,
  canvas: CanvasSize,
  bounds: PhysicalBounds,
): [number, number] {
  const x = bounds.x_min + (px / canvas.width) * (bounds.x_max - bounds.x_min);
  const y = bounds.y_min + (py / canvas.height) * (bounds.y_max - bounds.y_min);
  return clampToBounds(x, y, bounds);
}

/** Forward mapping, matching the PCA's rounding (half up) and clamping. */
export function physicalToCanvas(
  x: number,
  y: number,
  canvas: CanvasSize,
  bounds: PhysicalBounds,
): [number, number] {
  const sx = canvas.width / (bounds.x_max - bounds.x_min);
  const sy = canvas.height / (bounds.y_max - bounds.y_min);
  const px = Math.floor(sx * (x - bounds.x_min) + 0.5);
  const py = Math.floor(sy * (y - bounds.y_min) + 0.5);
  return [
    Math.min(Math.max(px, 0), canvas.width),
    Math.min(Math.max(py, 0), canvas.height),
  ];
}

export type SteerDirection = "up" | "down" | "left" | "right";

export class SteeringModel {
  private target: [number, number] | null = null;
  private dirty = false;
  private lastSentMs = -Infinity;
  private held = new Set<SteerDirection>();

  constructor(
    private bounds: PhysicalBounds,
    private canvas: CanvasSize,
    private keySpeed: number = KEY_SPEED_M_S,
  ) {}

  setCalibration(bounds: PhysicalBounds, canvas: CanvasSize): void {
    this.bounds = bounds;
    this.canvas = canvas;
  }

  get currentTarget(): [number, number] | null {
    return this.target;
  }

  /** Drag mode: pointer pixels become the steering target directly. */
  pointTo(px: number, py: number): [number, number] {
    this.target = canvasToPhysical(px, py, this.canvas, this.bounds);
    this.dirty = true;
    return this.target;
  }

  keyDown(direction: SteerDirection): void {
    this.held.add(direction);
  }

  keyUp(direction: SteerDirection): void {
    this.held.delete(direction);
  }

  /** Keys mode: integrate the held directions over dt seconds. */
  tick(dtSeconds: number, physical?: [number, number]): void {
    if (this.held.size === 0) {
      return;
    }
    let vx = 0;
    let vy = 0;
    if (this.held.has("left")) vx -= 1;
    if (this.held.has("right")) vx += 1;
    if (this.held.has("up")) vy += 1;
    if (this.held.has("down")) vy -= 1;
    if (vx === 0 && vy === 0) {
      return;
    }
    const norm = Math.hypot(vx, vy);
    const base = this.target ?? physical ?? [
      (this.bounds.x_min + this.bounds.x_max) / 2,
      (this.bounds.y_min + this.bounds.y_max) / 2,
    ];
    this.target = clampToBounds(
      base[0] + (vx / norm) * this.keySpeed * dtSeconds,
      base[1] + (vy / norm) * this.keySpeed * dtSeconds,
      this.bounds,
    );
    this.dirty = true;
  }

  /** The target to send now, rate limited; null when nothing is due. */
  takeDue(nowMs: number): [number, number] | null {
    if (!this.dirty || this.target === null) {
      return null;
    }
    if (nowMs - this.lastSentMs < 1000 / MAX_STEER_HZ) {
      return null;
    }
    this.lastSentMs = nowMs;
    this.dirty = false;
    return this.target;
  }
}
