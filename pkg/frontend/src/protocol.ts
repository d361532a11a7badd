/** Parsing and encoding of bridge messages. Pure functions, no DOM. */

import type { BridgeMessage, StateMessage } from "./types.js";

function isPair(v: unknown): v is [number, number] {
  return (
    Array.isArray(v) &&
    v.length === 2 &&
    typeof v[0] === "number" &&
    typeof v[1] === "number"
  );
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Parse one incoming frame; null for anything malformed or unknown. */
export function parseMessage(raw: string): BridgeMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) {
    return null;
  }
  const msg = data as Record<string, unknown>;
  if (msg.type === "steer") {
    if (!isFiniteNumber(msg.x) || !isFiniteNumber(msg.y)) {
      return null;
    }
    return { type: "steer", x: msg.x, y: msg.y };
  }
  if (msg.type === "state") {
    const canvas = msg.canvas as Record<string, unknown> | undefined;
    const bounds = msg.bounds as Record<string, unknown> | undefined;
    if (
      !isPair(msg.cursor) ||
      !isFiniteNumber(msg.dwell) ||
      typeof msg.app !== "string" ||
      !canvas ||
      !isFiniteNumber(canvas.width) ||
      !isFiniteNumber(canvas.height) ||
      !bounds ||
      !isFiniteNumber(bounds.x_min) ||
      !isFiniteNumber(bounds.x_max) ||
      !isFiniteNumber(bounds.y_min) ||
      !isFiniteNumber(bounds.y_max) ||
      !isPair(msg.physical)
    ) {
      return null;
    }
    return msg as unknown as StateMessage;
  }
  return null;
}

export function encodeSteer(x: number, y: number): string {
  return JSON.stringify({ type: "steer", x, y });
}

export function encodeSelect(app: string): string {
  return JSON.stringify({ type: "select", app });
}
