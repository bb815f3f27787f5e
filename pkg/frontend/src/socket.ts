/**
 * Reconnecting WebSocket wrapper.  On disconnect it retries with
 * exponential backoff (0.5 s doubling to 8 s) and tells the UI so a
 * banner can be shown; outgoing sends while closed are silently dropped
 * (the next tick after reconnect carries the full state anyway).
 */

export interface SocketHandlers {
  onMessage(raw: string): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  readyState: number;
}

export interface ReconnectOptions {
  makeSocket?: (url: string) => SocketLike;
  schedule?: (fn: () => void, ms: number) => unknown;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

export const SOCKET_OPEN = 1;

export function backoffDelays(baseMs: number, maxMs: number, attempts: number): number[] {
  const out: number[] = [];
  for (let i = 0; i < attempts; i++) {
    out.push(Math.min(baseMs * 2 ** i, maxMs));
  }
  return out;
}

export class ReconnectingSocket {
  private socket: SocketLike | null = null;
  private attempt = 0;
  private closed = false;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;

  constructor(
    private readonly url: string,
    private readonly handlers: SocketHandlers,
    options: ReconnectOptions = {},
  ) {
    this.makeSocket =
      options.makeSocket ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.baseDelayMs = options.baseDelayMs ?? 500;
    this.maxDelayMs = options.maxDelayMs ?? 8000;
    this.connect();
  }

  private connect(): void {
    if (this.closed) return;
    this.handlers.onStatus("connecting");
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus("open");
    };
    socket.onmessage = (event) => this.handlers.onMessage(event.data);
    const retry = () => {
      if (this.closed) return;
      this.handlers.onStatus("closed");
      const delay = Math.min(this.baseDelayMs * 2 ** this.attempt, this.maxDelayMs);
      this.attempt += 1;
      this.schedule(() => this.connect(), delay);
    };
    socket.onclose = retry;
    socket.onerror = () => {
      // the close handler owns reconnection; some sockets fire both
    };
  }

  send(data: string): boolean {
    if (this.socket !== null && this.socket.readyState === SOCKET_OPEN) {
      this.socket.send(data);
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    if (this.socket !== null) {
      this.socket.onclose = null;
      this.socket.close();
    }
  }
}
