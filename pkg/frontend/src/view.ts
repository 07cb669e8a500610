import type { ConsoleState } from "./reducer.js";
import type { EventMsg } from "./protocol.js";

// DOM painting only. No state lives here; everything is a pure
// function of the ConsoleState snapshot handed in by the render loop.

export interface ViewRefs {
  banner: HTMLElement;
  connection: HTMLElement;
  poseX: HTMLElement;
  poseY: HTMLElement;
  poseTheta: HTMLElement;
  poseSeq: HTMLElement;
  estop: HTMLElement;
  canvas: HTMLCanvasElement;
  eventList: HTMLElement;
  controls: HTMLFieldSetElement;
}

const SEVERITY: Record<string, string> = {
  AuthzDenied: "danger",
  BadSignature: "danger",
  Replay: "danger",
  UnknownSender: "danger",
  HandshakeFailed: "danger",
  PlaintextRejected: "danger",
  QueueOverflow: "warn",
  ConnectionLost: "warn",
};

export function eventSeverity(kind: string): string {
  return SEVERITY[kind] ?? "info";
}

export function formatEvent(ev: EventMsg): string {
  const when = ev.ts > 0 ? new Date(ev.ts * 1000).toISOString().slice(11, 19) : "--:--:--";
  const who = ev.subject || "?";
  const where = ev.topic ? ` ${ev.topic}` : "";
  const why = ev.detail ? `: ${ev.detail}` : "";
  return `${when} ${ev.kind} ${who}${where}${why}`;
}

export function render(refs: ViewRefs, state: ConsoleState): void {
  refs.connection.textContent = state.connection;
  refs.connection.className = `conn conn-${state.connection}`;

  if (state.banner) {
    refs.banner.textContent = state.banner;
    refs.banner.hidden = false;
  } else {
    refs.banner.hidden = true;
  }

  // Movement controls work only on a live link; e-stop stays usable
  // so the operator can always mash it (it just reports when blocked).
  refs.controls.disabled = state.connection !== "live";

  const st = state.status;
  refs.poseX.textContent = st ? st.x.toFixed(3) : "-";
  refs.poseY.textContent = st ? st.y.toFixed(3) : "-";
  refs.poseTheta.textContent = st ? st.theta.toFixed(3) : "-";
  refs.poseSeq.textContent = st ? String(st.seq) : "-";

  const engaged = st?.estop ?? false;
  refs.estop.textContent = engaged ? "E-STOP ENGAGED" : "e-stop clear";
  refs.estop.className = engaged ? "estop engaged" : "estop clear";

  drawTrace(refs.canvas, state);
  renderEvents(refs.eventList, state.events);
}

function drawTrace(canvas: HTMLCanvasElement, state: ConsoleState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  // Fit the whole trace with a margin, minimum 2 m across so a parked
  // agent does not zoom to pixel noise.
  let minX = -1, maxX = 1, minY = -1, maxY = 1;
  for (const p of state.trace) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const span = Math.max(maxX - minX, maxY - minY, 2);
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  const scale = (Math.min(w, h) * 0.9) / span;
  const px = (x: number) => w / 2 + (x - cx) * scale;
  const py = (y: number) => h / 2 - (y - cy) * scale;

  ctx.strokeStyle = "#2e4756";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(px(cx - span), py(0));
  ctx.lineTo(px(cx + span), py(0));
  ctx.moveTo(px(0), py(cy - span));
  ctx.lineTo(px(0), py(cy + span));
  ctx.stroke();

  if (state.trace.length > 1) {
    ctx.strokeStyle = "#58a6ff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.trace.forEach((p, i) => {
      if (i === 0) ctx.moveTo(px(p.x), py(p.y));
      else ctx.lineTo(px(p.x), py(p.y));
    });
    ctx.stroke();
  }

  const st = state.status;
  if (st) {
    const hx = px(st.x);
    const hy = py(st.y);
    ctx.fillStyle = st.estop ? "#f85149" : "#3fb950";
    ctx.beginPath();
    ctx.arc(hx, hy, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = ctx.fillStyle;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(hx, hy);
    ctx.lineTo(hx + 14 * Math.cos(st.theta), hy - 14 * Math.sin(st.theta));
    ctx.stroke();
  }
}

function renderEvents(list: HTMLElement, events: EventMsg[]): void {
  const doc = list.ownerDocument;
  list.replaceChildren();
  // Newest first; the feed itself is already bounded by the reducer.
  for (let i = events.length - 1; i >= 0; i--) {
    const ev = events[i];
    if (!ev) continue;
    const li = doc.createElement("li");
    li.className = `ev ev-${eventSeverity(ev.kind)}`;
    li.textContent = formatEvent(ev);
    list.appendChild(li);
  }
}
