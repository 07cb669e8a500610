import { createBackoff, type Backoff } from "./backoff.js";
import {
  encode,
  makeCmd,
  makeEstop,
  parseInbound,
} from "./protocol.js";
import type { Action } from "./reducer.js";

// Thin socket owner. Exactly one socket at a time, reconnects with
// backoff, and refuses to send unless the link is actually live.

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  factory?: SocketFactory;
  backoff?: Backoff;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
  minCmdGapMs?: number;
}

const defaultFactory: SocketFactory = (url) =>
  new WebSocket(url) as unknown as SocketLike;

export class ConsoleClient {
  private readonly url: string;
  private readonly dispatch: (action: Action) => void;
  private readonly factory: SocketFactory;
  private readonly backoff: Backoff;
  private readonly now: () => number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancelTimer: (handle: unknown) => void;
  private readonly minCmdGapMs: number;

  private socket: SocketLike | null = null;
  private live = false;
  private stopped = false;
  private retryHandle: unknown = null;
  private lastCmdAt = -Infinity;

  constructor(url: string, dispatch: (action: Action) => void, opts: ClientOptions = {}) {
    this.url = url;
    this.dispatch = dispatch;
    this.factory = opts.factory ?? defaultFactory;
    this.backoff = opts.backoff ?? createBackoff();
    this.now = opts.now ?? (() => performance.now());
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancelTimer = opts.cancel ?? ((h) => clearTimeout(h as number));
    this.minCmdGapMs = opts.minCmdGapMs ?? 100;
  }

  get isLive(): boolean {
    return this.live;
  }

  connect(): void {
    if (this.stopped || this.socket) return;
    this.dispatch({ type: "socket-connecting" });
    let sock: SocketLike;
    try {
      sock = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = sock;
    sock.onopen = () => {
      this.live = true;
      this.backoff.reset();
      this.dispatch({ type: "socket-open" });
    };
    sock.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      const msg = parseInbound(ev.data);
      if (msg === null) return;
      if (msg.type === "status") this.dispatch({ type: "status", status: msg });
      else this.dispatch({ type: "event", event: msg });
    };
    sock.onclose = () => {
      if (this.socket !== sock) return;
      this.socket = null;
      this.live = false;
      this.scheduleRetry();
    };
    // Errors are always followed by close; nothing extra to do.
    sock.onerror = () => {};
  }

  /** Permanently stop: close the socket and cancel any pending retry. */
  close(): void {
    this.stopped = true;
    if (this.retryHandle !== null) {
      this.cancelTimer(this.retryHandle);
      this.retryHandle = null;
    }
    const sock = this.socket;
    this.socket = null;
    this.live = false;
    if (sock) sock.close();
    this.dispatch({ type: "socket-closed", retryDelayMs: null });
  }

  /**
   * Send one velocity command. Returns false (and surfaces why) when
   * the link is down; silently coalesces bursts above 10 per second so
   * held keys cannot flood the bridge.
   */
  sendCommand(v: number, omega: number): boolean {
    if (!this.live || this.socket === null) {
      this.dispatch({ type: "send-blocked", reason: "not connected, command not sent" });
      return false;
    }
    const t = this.now();
    if (t - this.lastCmdAt < this.minCmdGapMs) return false;
    this.lastCmdAt = t;
    this.socket.send(encode(makeCmd(v, omega)));
    this.dispatch({ type: "sent-cmd" });
    return true;
  }

  /** E-stop bypasses the command rate limit; it must never queue. */
  sendEstop(engage: boolean): boolean {
    if (!this.live || this.socket === null) {
      this.dispatch({ type: "send-blocked", reason: "not connected, e-stop not sent" });
      return false;
    }
    this.socket.send(encode(makeEstop(engage)));
    this.dispatch({ type: "sent-estop" });
    return true;
  }

  private scheduleRetry(): void {
    if (this.stopped) return;
    const delay = this.backoff.next();
    this.dispatch({ type: "socket-closed", retryDelayMs: delay });
    this.retryHandle = this.schedule(() => {
      this.retryHandle = null;
      this.connect();
    }, delay);
  }
}
