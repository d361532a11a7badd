/** Websocket client for the PCA bridge with quiet auto-reconnect. */

import { parseMessage } from "./protocol.js";
import type { BridgeStatus, StateMessage } from "./types.js";

export interface BridgeHandlers {
  onState: (state: StateMessage) => void;
  onStatus: (status: BridgeStatus) => void;
}

export const RECONNECT_DELAY_MS = 1000;

export class BridgeClient {
  private socket: WebSocket | null = null;
  private timer: number | undefined;
  private closed = false;

  constructor(
    private url: string,
    private handlers: BridgeHandlers,
    private reconnectDelayMs: number = RECONNECT_DELAY_MS,
  ) {}

  connect(): void {
    this.closed = false;
    this.handlers.onStatus("connecting");
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => this.handlers.onStatus("open"));
    socket.addEventListener("message", (event) => {
      const message = parseMessage(String(event.data));
      if (message !== null && message.type === "state") {
        this.handlers.onState(message);
      }
    });
    socket.addEventListener("close", () => this.scheduleReconnect());
    socket.addEventListener("error", () => socket.close());
  }

  private scheduleReconnect(): void {
    this.handlers.onStatus("closed");
    if (this.closed || this.timer !== undefined) {
      return;
    }
    this.timer = setTimeout(() => {
      this.timer = undefined;
      if (!this.closed) {
        this.connect();
      }
    }, this.reconnectDelayMs) as unknown as number;
  }

  /** Best effort send; drops silently while disconnected. */
  send(raw: string): boolean {
    if (this.socket !== null && this.socket.readyState === WebSocket.OPEN) {
      this.socket.send(raw);
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== undefined) {
      clearTimeout(this.timer);
      this.timer = undefined;
    }
    this.socket?.close();
  }
}
