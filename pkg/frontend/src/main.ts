/** Entry point: wire bridge, steering input, and the render loop. */

import { BridgeClient } from "./bridge.js";
import { encodeSelect, encodeSteer } from "./protocol.js";
import { render } from "./render.js";
import { SteeringModel, type SteerDirection } from "./steering.js";
import type { BridgeStatus, StateMessage, Tile } from "./types.js";

const KEYMAP: Record<string, SteerDirection> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
  w: "up",
  s: "down",
  a: "left",
  d: "right",
};

function bridgeUrl(): string {
  const param = new URLSearchParams(window.location.search).get("bridge");
  return param ?? `ws://${window.location.hostname || "localhost"}:5006`;
}

function main(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("canvas 2d context unavailable");
  }

  let state: StateMessage | null = null;
  let status: BridgeStatus = "connecting";
  let steering: SteeringModel | null = null;

  const bridge = new BridgeClient(bridgeUrl(), {
    onState: (incoming) => {
      state = incoming;
      if (canvas.width !== incoming.canvas.width || canvas.height !== incoming.canvas.height) {
        canvas.width = incoming.canvas.width;
        canvas.height = incoming.canvas.height;
      }
      if (steering === null) {
        steering = new SteeringModel(incoming.bounds, incoming.canvas);
      } else {
        steering.setCalibration(incoming.bounds, incoming.canvas);
      }
    },
    onStatus: (s) => {
      status = s;
    },
  });
  bridge.connect();

  const pixelFromEvent = (event: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return [
      ((event.clientX - rect.left) / rect.width) * canvas.width,
      ((event.clientY - rect.top) / rect.height) * canvas.height,
    ];
  };

  let dragging = false;
  canvas.addEventListener("pointerdown", (event) => {
    dragging = true;
    canvas.setPointerCapture(event.pointerId);
    const [px, py] = pixelFromEvent(event);
    steering?.pointTo(px, py);
  });
  canvas.addEventListener("pointermove", (event) => {
    if (dragging) {
      const [px, py] = pixelFromEvent(event);
      steering?.pointTo(px, py);
    }
  });
  canvas.addEventListener("pointerup", () => {
    dragging = false;
  });

  window.addEventListener("keydown", (event) => {
    const direction = KEYMAP[event.key];
    if (direction !== undefined) {
      steering?.keyDown(direction);
      event.preventDefault();
    }
  });
  window.addEventListener("keyup", (event) => {
    const direction = KEYMAP[event.key];
    if (direction !== undefined) {
      steering?.keyUp(direction);
    }
  });

  // Operator shortcut: digit keys launch apps directly via select.
  window.addEventListener("keydown", (event) => {
    if (state === null || !/^[1-9]$/.test(event.key)) {
      return;
    }
    const tiles = (state.payload.tiles as Tile[] | undefined) ?? [];
    const tile = tiles[Number(event.key) - 1];
    if (tile !== undefined) {
      bridge.send(encodeSelect(tile.app));
    }
  });

  let lastFrameMs = performance.now();
  const frame = (nowMs: number): void => {
    const dt = Math.min((nowMs - lastFrameMs) / 1000, 0.1);
    lastFrameMs = nowMs;
    if (steering !== null) {
      steering.tick(dt, state?.physical);
      const due = steering.takeDue(nowMs);
      if (due !== null) {
        bridge.send(encodeSteer(due[0], due[1]));
      }
    }
    render(ctx, state, status);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

window.addEventListener("load", main);
