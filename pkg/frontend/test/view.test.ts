import { describe, expect, it } from "vitest";
import { eventSeverity, formatEvent } from "../src/view.js";
import { resolveBridgeUrl } from "../src/main.js";

describe("eventSeverity", () => {
  it.each([
    ["AuthzDenied", "danger"],
    ["BadSignature", "danger"],
    ["Replay", "danger"],
    ["UnknownSender", "danger"],
    ["HandshakeFailed", "danger"],
    ["PlaintextRejected", "danger"],
    ["QueueOverflow", "warn"],
    ["ConnectionLost", "warn"],
    ["SomethingNew", "info"],
  ])("%s renders as %s", (kind, want) => {
    expect(eventSeverity(kind)).toBe(want);
  });
});

describe("formatEvent", () => {
  it("shows time, kind, subject, topic and detail", () => {
    const line = formatEvent({
      type: "event",
      ts: 1700000000,
      kind: "AuthzDenied",
      subject: "attacker",
      topic: "/command",
      detail: "publish denied",
    });
    expect(line).toContain("AuthzDenied");
    expect(line).toContain("attacker");
    expect(line).toContain("/command");
    expect(line).toContain("publish denied");
    expect(line).toMatch(/^\d{2}:\d{2}:\d{2} /);
  });

  it("copes with a bare synthetic event", () => {
    const line = formatEvent({
      type: "event",
      ts: 0,
      kind: "ConnectionLost",
      subject: "",
      topic: "",
      detail: "",
    });
    expect(line).toBe("--:--:-- ConnectionLost ?");
  });
});

describe("resolveBridgeUrl", () => {
  it("prefers an explicit ?ws= override", () => {
    const url = resolveBridgeUrl({
      search: "?ws=ws://10.0.0.5:9001/",
      hostname: "localhost",
      port: "8801",
    });
    expect(url).toBe("ws://10.0.0.5:9001/");
  });

  it("dials one port below the static server", () => {
    expect(resolveBridgeUrl({ search: "", hostname: "127.0.0.1", port: "8801" })).toBe(
      "ws://127.0.0.1:8800/",
    );
  });

  it("falls back to the documented default port", () => {
    expect(resolveBridgeUrl({ search: "", hostname: "whatever", port: "" })).toBe(
      "ws://127.0.0.1:8800/",
    );
  });
});
