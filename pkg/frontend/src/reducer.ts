import type { EventMsg, StatusMsg } from "./protocol.js";

// All console state lives here and changes only through reduce().
// The socket layer dispatches actions; the view renders snapshots.

export type Connection = "disconnected" | "connecting" | "live";

export const EVENT_BOUND = 200;
export const TRACE_BOUND = 600;

export interface TracePoint {
  x: number;
  y: number;
}

export interface ConsoleState {
  connection: Connection;
  status: StatusMsg | null;
  events: EventMsg[];
  trace: TracePoint[];
  retryDelayMs: number | null;
  banner: string | null;
  sentCmds: number;
  sentEstops: number;
}

export type Action =
  | { type: "socket-connecting" }
  | { type: "socket-open" }
  | { type: "socket-closed"; retryDelayMs: number | null }
  | { type: "status"; status: StatusMsg }
  | { type: "event"; event: EventMsg }
  | { type: "sent-cmd" }
  | { type: "sent-estop" }
  | { type: "send-blocked"; reason: string };

export function initialState(): ConsoleState {
  return {
    connection: "disconnected",
    status: null,
    events: [],
    trace: [],
    retryDelayMs: null,
    banner: null,
    sentCmds: 0,
    sentEstops: 0,
  };
}

export function reduce(state: ConsoleState, action: Action): ConsoleState {
  switch (action.type) {
    case "socket-connecting":
      return { ...state, connection: "connecting", banner: null };

    case "socket-open":
      return { ...state, connection: "live", retryDelayMs: null, banner: null };

    case "socket-closed":
      return {
        ...state,
        connection: "disconnected",
        retryDelayMs: action.retryDelayMs,
        banner:
          action.retryDelayMs === null
            ? "link closed"
            : `link lost, retrying in ${(action.retryDelayMs / 1000).toFixed(1)}s`,
      };

    case "status": {
      const trace = [...state.trace, { x: action.status.x, y: action.status.y }];
      if (trace.length > TRACE_BOUND) trace.splice(0, trace.length - TRACE_BOUND);
      return { ...state, status: action.status, trace };
    }

    case "event": {
      // Bounded feed: newest appended, oldest dropped past the cap.
      const events = [...state.events, action.event];
      if (events.length > EVENT_BOUND) events.splice(0, events.length - EVENT_BOUND);
      return { ...state, events };
    }

    case "sent-cmd":
      return { ...state, sentCmds: state.sentCmds + 1 };

    case "sent-estop":
      return { ...state, sentEstops: state.sentEstops + 1 };

    case "send-blocked":
      return { ...state, banner: action.reason };
  }
}
