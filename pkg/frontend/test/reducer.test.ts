import { describe, expect, it } from "vitest";
import type { EventMsg, StatusMsg } from "../src/protocol.js";
import {
  EVENT_BOUND,
  TRACE_BOUND,
  initialState,
  reduce,
  type ConsoleState,
} from "../src/reducer.js";

function status(seq: number, x = 0): StatusMsg {
  return { type: "status", x, y: 0, theta: 0, estop: false, seq };
}

function event(n: number): EventMsg {
  return { type: "event", ts: n, kind: "Replay", subject: "s", topic: "/t", detail: `e${n}` };
}

describe("connection transitions", () => {
  it("starts disconnected with nothing to show", () => {
    const s = initialState();
    expect(s.connection).toBe("disconnected");
    expect(s.status).toBeNull();
    expect(s.events).toEqual([]);
    expect(s.banner).toBeNull();
  });

  it("connecting then open clears the retry state", () => {
    let s = reduce(initialState(), { type: "socket-connecting" });
    expect(s.connection).toBe("connecting");
    s = reduce(s, { type: "socket-open" });
    expect(s.connection).toBe("live");
    expect(s.retryDelayMs).toBeNull();
    expect(s.banner).toBeNull();
  });

  it("a drop surfaces the retry delay in the banner", () => {
    const s = reduce(initialState(), { type: "socket-closed", retryDelayMs: 2000 });
    expect(s.connection).toBe("disconnected");
    expect(s.retryDelayMs).toBe(2000);
    expect(s.banner).toContain("2.0s");
  });

  it("a deliberate close has no retry", () => {
    const s = reduce(initialState(), { type: "socket-closed", retryDelayMs: null });
    expect(s.retryDelayMs).toBeNull();
    expect(s.banner).toBe("link closed");
  });
});

describe("status and trace", () => {
  it("keeps only the latest status", () => {
    let s = reduce(initialState(), { type: "status", status: status(1) });
    s = reduce(s, { type: "status", status: status(2, 3.5) });
    expect(s.status?.seq).toBe(2);
    expect(s.trace).toEqual([
      { x: 0, y: 0 },
      { x: 3.5, y: 0 },
    ]);
  });

  it("bounds the trace", () => {
    let s = initialState();
    for (let i = 0; i < TRACE_BOUND + 50; i++) {
      s = reduce(s, { type: "status", status: status(i, i) });
    }
    expect(s.trace.length).toBe(TRACE_BOUND);
    expect(s.trace[0]?.x).toBe(50);
  });
});

describe("event feed", () => {
  it("appends in arrival order", () => {
    let s = initialState();
    s = reduce(s, { type: "event", event: event(1) });
    s = reduce(s, { type: "event", event: event(2) });
    expect(s.events.map((e) => e.detail)).toEqual(["e1", "e2"]);
  });

  it("drops the oldest past the bound", () => {
    let s = initialState();
    for (let i = 0; i < EVENT_BOUND + 50; i++) {
      s = reduce(s, { type: "event", event: event(i) });
    }
    expect(s.events.length).toBe(EVENT_BOUND);
    expect(s.events[0]?.detail).toBe("e50");
    expect(s.events[EVENT_BOUND - 1]?.detail).toBe(`e${EVENT_BOUND + 49}`);
  });
});

describe("send bookkeeping", () => {
  it("counts commands and e-stops separately", () => {
    let s = reduce(initialState(), { type: "sent-cmd" });
    s = reduce(s, { type: "sent-cmd" });
    s = reduce(s, { type: "sent-estop" });
    expect(s.sentCmds).toBe(2);
    expect(s.sentEstops).toBe(1);
  });

  it("a blocked send becomes a visible banner", () => {
    const s = reduce(initialState(), { type: "send-blocked", reason: "not connected" });
    expect(s.banner).toBe("not connected");
  });
});

describe("purity", () => {
  it("never mutates the input state", () => {
    const before: ConsoleState = initialState();
    const frozen = JSON.stringify(before);
    reduce(before, { type: "status", status: status(9) });
    reduce(before, { type: "event", event: event(9) });
    reduce(before, { type: "socket-open" });
    expect(JSON.stringify(before)).toBe(frozen);
  });
});
