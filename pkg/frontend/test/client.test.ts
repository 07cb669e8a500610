import { beforeEach, describe, expect, it } from "vitest";
import { ConsoleClient, type SocketLike } from "../src/client.js";
import { createBackoff } from "../src/backoff.js";
import type { Action } from "../src/reducer.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }
}

interface Timer {
  fn: () => void;
  ms: number;
  cancelled: boolean;
}

class Harness {
  sockets: FakeSocket[] = [];
  actions: Action[] = [];
  timers: Timer[] = [];
  clock = 0;
  client: ConsoleClient;

  constructor(minCmdGapMs = 100) {
    this.client = new ConsoleClient("ws://test/", (a) => this.actions.push(a), {
      factory: () => {
        const s = new FakeSocket();
        this.sockets.push(s);
        return s;
      },
      backoff: createBackoff(),
      now: () => this.clock,
      schedule: (fn, ms) => {
        const t: Timer = { fn, ms, cancelled: false };
        this.timers.push(t);
        return t;
      },
      cancel: (h) => {
        (h as Timer).cancelled = true;
      },
      minCmdGapMs,
    });
  }

  get socket(): FakeSocket {
    const s = this.sockets[this.sockets.length - 1];
    if (!s) throw new Error("no socket yet");
    return s;
  }

  open(): void {
    this.socket.onopen?.();
  }

  drop(): void {
    this.socket.onclose?.();
  }

  deliver(data: unknown): void {
    this.socket.onmessage?.({ data });
  }

  firePendingRetry(): Timer {
    const t = this.timers[this.timers.length - 1];
    if (!t) throw new Error("no timer scheduled");
    t.fn();
    return t;
  }

  kinds(): string[] {
    return this.actions.map((a) => a.type);
  }
}

let h: Harness;

beforeEach(() => {
  h = new Harness();
});

describe("connection lifecycle", () => {
  it("dials once and reports connecting then live", () => {
    h.client.connect();
    expect(h.sockets.length).toBe(1);
    expect(h.kinds()).toEqual(["socket-connecting"]);
    h.open();
    expect(h.kinds()).toEqual(["socket-connecting", "socket-open"]);
    expect(h.client.isLive).toBe(true);
  });

  it("a second connect while a socket exists is a no-op", () => {
    h.client.connect();
    h.client.connect();
    expect(h.sockets.length).toBe(1);
  });

  it("reconnects after a drop with growing delays", () => {
    h.client.connect();
    h.open();
    h.drop();
    expect(h.client.isLive).toBe(false);
    let closed = h.actions.find((a) => a.type === "socket-closed");
    expect(closed).toEqual({ type: "socket-closed", retryDelayMs: 500 });

    h.firePendingRetry();
    expect(h.sockets.length).toBe(2);
    h.drop(); // never opened, drops again
    closed = h.actions.filter((a) => a.type === "socket-closed")[1];
    expect(closed).toEqual({ type: "socket-closed", retryDelayMs: 1000 });
  });

  it("a successful open resets the backoff ramp", () => {
    h.client.connect();
    h.open();
    h.drop();
    h.firePendingRetry();
    h.open(); // recovered
    h.drop();
    const delays = h.actions
      .filter((a): a is Extract<Action, { type: "socket-closed" }> => a.type === "socket-closed")
      .map((a) => a.retryDelayMs);
    expect(delays).toEqual([500, 500]);
  });

  it("close() cancels the pending retry and stays down", () => {
    h.client.connect();
    h.open();
    h.drop();
    h.client.close();
    const timer = h.timers[0];
    expect(timer?.cancelled).toBe(true);
    h.client.connect(); // stopped clients refuse to dial again
    expect(h.sockets.length).toBe(1);
  });

  it("close() closes an open socket and reports a final close", () => {
    h.client.connect();
    h.open();
    h.client.close();
    expect(h.socket.closed).toBe(true);
    const last = h.actions[h.actions.length - 1];
    expect(last).toEqual({ type: "socket-closed", retryDelayMs: null });
  });
});

describe("inbound traffic", () => {
  it("dispatches parsed status and event frames", () => {
    h.client.connect();
    h.open();
    h.deliver('{"type":"status","x":1,"y":2,"theta":0,"estop":false,"seq":7}');
    h.deliver('{"type":"event","kind":"AuthzDenied"}');
    const types = h.kinds();
    expect(types).toContain("status");
    expect(types).toContain("event");
  });

  it("ignores garbage and binary frames", () => {
    h.client.connect();
    h.open();
    h.deliver("not json at all");
    h.deliver('{"type":"status"}');
    h.deliver(new ArrayBuffer(4));
    expect(h.kinds()).toEqual(["socket-connecting", "socket-open"]);
  });
});

describe("outbound commands", () => {
  it("refuses to send while down and surfaces why", () => {
    h.client.connect();
    expect(h.client.sendCommand(1, 0)).toBe(false);
    const blocked = h.actions.find((a) => a.type === "send-blocked");
    expect(blocked).toBeDefined();
  });

  it("sends one frame per accepted command", () => {
    h.client.connect();
    h.open();
    expect(h.client.sendCommand(1, 0.5)).toBe(true);
    expect(h.socket.sent).toEqual(['{"type":"cmd","v":1,"omega":0.5}']);
  });

  it("clamps out-of-range values before sending", () => {
    h.client.connect();
    h.open();
    h.client.sendCommand(50, -50);
    expect(JSON.parse(h.socket.sent[0] ?? "")).toEqual({ type: "cmd", v: 2, omega: -1.5 });
  });

  it("holds bursts to ten commands a second", () => {
    h.client.connect();
    h.open();
    expect(h.client.sendCommand(1, 0)).toBe(true);
    h.clock = 50;
    expect(h.client.sendCommand(1, 0)).toBe(false); // too soon, coalesced
    h.clock = 100;
    expect(h.client.sendCommand(1, 0)).toBe(true);
    expect(h.socket.sent.length).toBe(2);
  });

  it("e-stop ignores the rate limit entirely", () => {
    h.client.connect();
    h.open();
    h.client.sendCommand(1, 0);
    expect(h.client.sendEstop(true)).toBe(true);
    expect(h.client.sendEstop(false)).toBe(true);
    expect(h.socket.sent).toEqual([
      '{"type":"cmd","v":1,"omega":0}',
      '{"type":"estop","engage":true}',
      '{"type":"estop","engage":false}',
    ]);
  });

  it("e-stop while down is refused loudly, not queued", () => {
    expect(h.client.sendEstop(true)).toBe(false);
    const blocked = h.actions.find((a) => a.type === "send-blocked");
    expect(blocked && "reason" in blocked && blocked.reason).toContain("e-stop");
  });
});
