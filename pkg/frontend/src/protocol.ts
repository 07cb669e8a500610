// Wire shapes for the ground-station console bridge. The bridge speaks
// plain JSON over a loopback websocket; see the note in index.html for
// why that is acceptable here (the secured hop is station <-> broker).

export const V_MAX = 2.0;
export const OMEGA_MAX = 1.5;

export interface StatusMsg {
  type: "status";
  x: number;
  y: number;
  theta: number;
  estop: boolean;
  seq: number;
}

export interface EventMsg {
  type: "event";
  ts: number;
  kind: string;
  subject: string;
  topic: string;
  detail: string;
}

export type Inbound = StatusMsg | EventMsg;

export interface CmdMsg {
  type: "cmd";
  v: number;
  omega: number;
}

export interface EstopMsg {
  type: "estop";
  engage: boolean;
}

export type Outbound = CmdMsg | EstopMsg;

function finite(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

/** Parse one bridge frame. Returns null for anything malformed. */
export function parseInbound(raw: string): Inbound | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;

  if (msg.type === "status") {
    if (!finite(msg.x) || !finite(msg.y) || !finite(msg.theta)) return null;
    if (typeof msg.estop !== "boolean" || !finite(msg.seq)) return null;
    return {
      type: "status",
      x: msg.x,
      y: msg.y,
      theta: msg.theta,
      estop: msg.estop,
      seq: msg.seq,
    };
  }

  if (msg.type === "event") {
    if (typeof msg.kind !== "string" || msg.kind === "") return null;
    return {
      type: "event",
      ts: finite(msg.ts) ? msg.ts : 0,
      kind: msg.kind,
      subject: typeof msg.subject === "string" ? msg.subject : "",
      topic: typeof msg.topic === "string" ? msg.topic : "",
      detail: typeof msg.detail === "string" ? msg.detail : "",
    };
  }

  return null;
}

function clamp(value: number, bound: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.max(-bound, Math.min(bound, value));
}

/**
 * Build a velocity command, clamped to the same bounds the agent
 * enforces so sliders past the limit never leave the page.
 */
export function makeCmd(v: number, omega: number): CmdMsg {
  return { type: "cmd", v: clamp(v, V_MAX), omega: clamp(omega, OMEGA_MAX) };
}

export function makeEstop(engage: boolean): EstopMsg {
  return { type: "estop", engage };
}

export function encode(msg: Outbound): string {
  return JSON.stringify(msg);
}
