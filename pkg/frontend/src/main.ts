import { ConsoleClient } from "./client.js";
import { Teleop } from "./keyboard.js";
import { OMEGA_MAX, V_MAX } from "./protocol.js";
import { initialState, reduce, type Action, type ConsoleState } from "./reducer.js";
import { render, type ViewRefs } from "./view.js";

// Entry point: one socket, one reducer, one render loop.

const FRAME_MS = 1000 / 30;
const CMD_PUMP_MS = 100; // matches the client's 10 Hz send budget

/**
 * Where to dial. `?ws=` wins; otherwise assume we were served by the
 * station's static server, which always sits one port above the
 * bridge; fall back to the port used throughout the docs.
 */
export function resolveBridgeUrl(loc: { search: string; hostname: string; port: string }): string {
  const override = new URLSearchParams(loc.search).get("ws");
  if (override) return override;
  const port = Number(loc.port);
  if (Number.isInteger(port) && port > 1) return `ws://${loc.hostname}:${port - 1}/`;
  return "ws://127.0.0.1:8800/";
}

function grab<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

function start(): void {
  const refs: ViewRefs = {
    banner: grab("banner"),
    connection: grab("connection"),
    poseX: grab("pose-x"),
    poseY: grab("pose-y"),
    poseTheta: grab("pose-theta"),
    poseSeq: grab("pose-seq"),
    estop: grab("estop-state"),
    canvas: grab<HTMLCanvasElement>("trace"),
    eventList: grab("events"),
    controls: grab<HTMLFieldSetElement>("drive-controls"),
  };

  let state: ConsoleState = initialState();
  let dirty = true;
  let lastPaint = 0;

  function dispatch(action: Action): void {
    state = reduce(state, action);
    dirty = true;
  }

  // Paint at most 30 times a second, and only when something changed.
  function loop(ts: number): void {
    if (dirty && ts - lastPaint >= FRAME_MS) {
      render(refs, state);
      dirty = false;
      lastPaint = ts;
    }
    requestAnimationFrame(loop);
  }
  requestAnimationFrame(loop);

  const client = new ConsoleClient(resolveBridgeUrl(window.location), dispatch);
  client.connect();

  // Keyboard teleop: track held keys, send on a fixed pump so neither
  // key auto-repeat nor combos produce more than 10 commands a second.
  const teleop = new Teleop();
  let pumpWasActive = false;
  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    const action = teleop.keyDown(ev.key);
    if (action === "estop") {
      ev.preventDefault();
      client.sendEstop(true);
    } else if (action === "move") {
      ev.preventDefault();
    }
  });
  window.addEventListener("keyup", (ev) => {
    teleop.keyUp(ev.key);
  });
  window.addEventListener("blur", () => {
    teleop.clear();
  });

  setInterval(() => {
    const cmd = teleop.command();
    if (cmd) {
      client.sendCommand(cmd.v, cmd.omega);
      pumpWasActive = true;
    } else if (pumpWasActive) {
      // One stop command when the last key is released, then idle.
      client.sendCommand(0, 0);
      pumpWasActive = false;
    }
  }, CMD_PUMP_MS);

  // Slider drive: a click on "send" is exactly one outbound message.
  const vInput = grab<HTMLInputElement>("v-input");
  const omegaInput = grab<HTMLInputElement>("omega-input");
  vInput.max = String(V_MAX);
  vInput.min = String(-V_MAX);
  omegaInput.max = String(OMEGA_MAX);
  omegaInput.min = String(-OMEGA_MAX);
  grab("send-cmd").addEventListener("click", () => {
    client.sendCommand(Number(vInput.value), Number(omegaInput.value));
  });
  grab("send-stop").addEventListener("click", () => {
    client.sendCommand(0, 0);
  });

  grab("estop-engage").addEventListener("click", () => client.sendEstop(true));
  grab("estop-release").addEventListener("click", () => client.sendEstop(false));
}

// Tests import resolveBridgeUrl without a DOM.
if (typeof document !== "undefined") start();
