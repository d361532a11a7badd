/** Message shapes exchanged with the PCA ui bridge. */

export interface CanvasSize {
  width: number;
  height: number;
}

export interface PhysicalBounds {
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}

export interface AppInfo {
  id: string;
  name: string;
}

export interface Tile {
  app: string;
  name: string;
  rect: [number, number, number, number];
  hover: boolean;
}

export interface StateMessage {
  type: "state";
  app: string;
  cursor: [number, number];
  dwell: number;
  seq: number;
  canvas: CanvasSize;
  bounds: PhysicalBounds;
  physical: [number, number];
  clamped: boolean;
  apps: AppInfo[];
  anchors?: [number, number][];
  payload: Record<string, unknown>;
}

export interface SteerMessage {
  type: "steer";
  x: number;
  y: number;
}

export type BridgeMessage = StateMessage | SteerMessage;

export type BridgeStatus = "connecting" | "open" | "closed";
