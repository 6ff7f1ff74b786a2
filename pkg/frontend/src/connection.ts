// Socket wrapper: validates every message both ways, keeps the last known
// frame so rendering never blocks on the network, and reconnects with
// backoff after connection loss.

import {
  ClientMessage,
  ErrorRecord,
  Frame,
  ServerMessage,
  Status,
  decodeServerMessage,
  encodeClientMessage,
} from "./protocol.js";

// Structural subset of the browser WebSocket so tests can inject a mock.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  readyState: number;
}

export type SocketFactory = (url: string) => SocketLike;

export const SOCKET_OPEN = 1;

export interface ConnectionEvents {
  onFrame?: (frame: Frame) => void;
  onStatus?: (status: Status) => void;
  onErrorRecord?: (err: ErrorRecord) => void;
  onConnectionChange?: (connected: boolean) => void;
}

export class TelemetryClient {
  lastFrame: Frame | null = null;
  lastStatus: Status | null = null;
  connected = false;
  private socket: SocketLike | null = null;
  private closedByUser = false;
  private retryMs: number;

  constructor(
    private readonly url: string,
    private readonly events: ConnectionEvents,
    private readonly makeSocket: SocketFactory,
    private readonly schedule: (fn: () => void, ms: number) => unknown = (
      fn,
      ms,
    ) => setTimeout(fn, ms),
    private readonly initialRetryMs = 500,
    private readonly maxRetryMs = 8000,
  ) {
    this.retryMs = initialRetryMs;
  }

  connect(): void {
    this.closedByUser = false;
    const sock = this.makeSocket(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.connected = true;
      this.retryMs = this.initialRetryMs;
      this.events.onConnectionChange?.(true);
    };
    sock.onclose = () => this.handleDisconnect();
    sock.onerror = () => {
      // the close handler owns reconnection; nothing to do here
    };
    sock.onmessage = (ev) => this.handleMessage(ev.data);
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }

  /** Validate and send; returns false when invalid or disconnected. */
  send(msg: ClientMessage): boolean {
    if (!this.socket || this.socket.readyState !== SOCKET_OPEN) return false;
    let encoded: string;
    try {
      encoded = encodeClientMessage(msg);
    } catch {
      return false;
    }
    this.socket.send(encoded);
    return true;
  }

  setSource(zMm: number): boolean {
    return this.send({ type: "set_source", z: zMm });
  }

  private handleMessage(raw: string): void {
    const msg: ServerMessage | null = decodeServerMessage(raw);
    if (msg === null) return; // never let a bad record break the stream
    switch (msg.type) {
      case "frame":
        this.lastFrame = msg;
        this.events.onFrame?.(msg);
        break;
      case "status":
        this.lastStatus = msg;
        this.events.onStatus?.(msg);
        break;
      case "error":
        this.events.onErrorRecord?.(msg);
        break;
    }
  }

  private handleDisconnect(): void {
    const wasConnected = this.connected;
    this.connected = false;
    if (wasConnected) this.events.onConnectionChange?.(false);
    if (this.closedByUser) return;
    const delay = this.retryMs;
    this.retryMs = Math.min(this.retryMs * 2, this.maxRetryMs);
    this.schedule(() => {
      if (!this.closedByUser) this.connect();
    }, delay);
  }
}
