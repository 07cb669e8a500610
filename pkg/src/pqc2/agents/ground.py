"""Ground station: the operator's end of the command channel.

Seals one envelope per operator action onto /command or /e-stop, watches
/status, and optionally exposes a local websocket bridge so a browser
console can drive it. The bridge speaks plain JSON on loopback; the secure
boundary stays station<->broker, and no key material ever reaches the UI.
"""

import http.server
import functools
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

from pqc2 import channel
from pqc2.bus.events import EventKind, EventLog, SecurityEvent
from pqc2.errors import ConnectionLost
from pqc2.agents import model
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node

log = logging.getLogger("pqc2.agents.ground")

STATUS_FORWARD_HZ = 30.0  # console gets at most this many status updates/s


@dataclass
class GroundConfig:
    identity: Identity
    host: str
    port: int
    mode: str = "none"
    command_topic: str = "/command"
    estop_topic: str = "/e-stop"
    status_topic: str = "/status"
    console_port: Optional[int] = None
    serve_ui: Optional[str] = None  # static dir, served on console_port + 1
    # broker event-log JSONL to mirror into the console feed; the broker is
    # the authz enforcement point, so denials only ever appear in its log
    watch_events: Optional[str] = None
    channel_config: Optional[channel.ChannelConfig] = None
    event_log: Optional[EventLog] = None


class GroundStation:
    def __init__(self, config: GroundConfig):
        self.config = config
        self.event_log = config.event_log if config.event_log is not None else EventLog()
        self._guard = InboundGuard(config.identity, config.mode, self.event_log)
        self._outbound = Outbound(config.identity, config.mode)
        self._session = None
        self._reader: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self.latest_status: Optional[dict] = None
        self.status_count = 0
        self.sent_commands = 0
        self.sent_estops = 0
        self._listeners: List[Callable[[dict], None]] = []
        self._bridge: Optional["ConsoleBridge"] = None
        self._ui_server = None
        self._tailer: Optional[threading.Thread] = None

    def start(self) -> "GroundStation":
        self._session = connect_node(
            self.config.identity, self.config.host, self.config.port, self.config.mode,
            publishes=[self.config.command_topic, self.config.estop_topic],
            subscribes=[self.config.status_topic],
            channel_config=self.config.channel_config,
        )
        self._reader = threading.Thread(target=self._status_loop, name="ground-status",
                                        daemon=True)
        self._reader.start()
        if self.config.console_port is not None:
            self._bridge = ConsoleBridge(self, self.config.console_port)
            self._bridge.start()
            if self.config.serve_ui:
                self._ui_server = _static_server(self.config.serve_ui,
                                                 self.config.console_port + 1)
        if self.config.watch_events:
            # pin the attach point now: anything already in the log is
            # history, anything appended from here on is forwarded
            try:
                fh = open(self.config.watch_events, "r", encoding="utf-8")
                fh.seek(0, os.SEEK_END)
            except OSError:
                fh = None
            self._tailer = threading.Thread(target=self._tail_events, args=(fh,),
                                            name="ground-events", daemon=True)
            self._tailer.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._bridge is not None:
            self._bridge.stop()
        if self._ui_server is not None:
            self._ui_server.shutdown()
        if self._session is not None:
            self._session.close()
        if self._reader is not None:
            self._reader.join(timeout=5)
        if self._tailer is not None:
            self._tailer.join(timeout=5)

    def __enter__(self) -> "GroundStation":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # operator actions: one action, one envelope

    def send_velocity(self, v: float, omega: float,
                      extra: Optional[dict] = None) -> bytes:
        """Seal and publish one command; returns the wire bytes sent."""
        wire = self._outbound.seal(self.config.command_topic,
                                   model.command_payload(v, omega, extra))
        self._session.publish(self.config.command_topic, wire)
        with self._lock:
            self.sent_commands += 1
        return wire

    def send_estop(self, engage: bool) -> bytes:
        wire = self._outbound.seal(self.config.estop_topic, model.estop_payload(engage))
        self._session.publish(self.config.estop_topic, wire)
        with self._lock:
            self.sent_estops += 1
        return wire

    def add_listener(self, fn: Callable[[dict], None]) -> None:
        """fn receives {'type': 'status'|'event', ...} dicts as they happen."""
        with self._lock:
            self._listeners.append(fn)

    def remove_listener(self, fn: Callable[[dict], None]) -> None:
        with self._lock:
            if fn in self._listeners:
                self._listeners.remove(fn)

    def push_event(self, event: SecurityEvent) -> None:
        """Forward an externally observed SecurityEvent to console listeners."""
        self._emit({
            "type": "event", "ts": event.ts, "kind": event.kind.value,
            "subject": event.subject, "topic": event.topic, "detail": event.detail,
        })

    def _emit(self, msg: dict) -> None:
        with self._lock:
            listeners = list(self._listeners)
        for fn in listeners:
            try:
                fn(msg)
            except Exception:
                log.exception("console listener failed")

    def _status_loop(self) -> None:
        while not self._stop.is_set():
            try:
                wire = self._session.next_envelope(self.config.status_topic, timeout=0.25)
            except TimeoutError:
                continue
            except ConnectionLost:
                self._emit({"type": "event", "kind": "ConnectionLost",
                            "subject": "", "topic": "", "detail": "broker link lost",
                            "ts": time.time()})
                return
            seen = len(self.event_log.events())
            env = self._guard.open(wire, self.config.status_topic)
            if env is None:
                for event in self.event_log.events()[seen:]:
                    self.push_event(event)
                continue
            try:
                status = model.parse_status(env.payload)
            except ValueError as exc:
                log.warning("bad status payload from %s: %s", env.sender, exc)
                continue
            with self._lock:
                self.latest_status = status
                self.status_count += 1
            self._emit({"type": "status", **status})

    def _tail_events(self, fh) -> None:
        """Mirror a broker event log (JSON lines) into the console feed.

        The broker is where authorization denials happen, so an operator
        watching attacks needs its log. Only events appended after the
        watcher attaches are forwarded; history is an audit concern, not
        a live-console one. A missing file is reopened from the top once
        it appears, since everything in it is then post-attach.
        """
        path = self.config.watch_events
        try:
            while not self._stop.is_set():
                if fh is None:
                    try:
                        fh = open(path, "r", encoding="utf-8")
                    except OSError:
                        self._stop.wait(0.2)
                        continue
                pos = fh.tell()
                line = fh.readline()
                if not line:
                    self._stop.wait(0.1)
                    continue
                if not line.endswith("\n"):
                    # writer mid-line; back up and let it finish
                    fh.seek(pos)
                    self._stop.wait(0.1)
                    continue
                try:
                    obj = json.loads(line)
                    event = SecurityEvent(
                        ts=float(obj["ts"]), kind=EventKind(obj["kind"]),
                        subject=str(obj.get("subject", "")),
                        topic=str(obj.get("topic", "")),
                        detail=str(obj.get("detail", "")),
                    )
                except (ValueError, KeyError, TypeError):
                    continue
                self.push_event(event)
        finally:
            if fh is not None:
                fh.close()


# websocket console bridge

class ConsoleBridge:
    """Local full-duplex JSON bridge for the web console.

    client -> station: {"type":"cmd","v":F,"omega":F}, {"type":"estop","engage":B}
    station -> client: {"type":"status",...}, {"type":"event",...}
    Status forwarding is throttled per client; events always go through.
    """

    def __init__(self, station: GroundStation, port: int):
        self.station = station
        self.port = port
        self._server = None
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        from websockets.sync.server import serve

        self._server = serve(self._handle, "127.0.0.1", self.port)
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="console-bridge", daemon=True
        )
        self._thread.start()
        log.info("console bridge on ws://127.0.0.1:%d", self.port)

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def _handle(self, ws) -> None:
        send_lock = threading.Lock()
        min_gap = 1.0 / STATUS_FORWARD_HZ
        last_status = [0.0]

        def listener(msg: dict) -> None:
            if msg.get("type") == "status":
                now = time.monotonic()
                if now - last_status[0] < min_gap:
                    return
                last_status[0] = now
            try:
                with send_lock:
                    ws.send(json.dumps(msg))
            except Exception:
                pass  # client went away; recv loop below will notice

        self.station.add_listener(listener)
        try:
            for raw in ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                kind = msg.get("type")
                try:
                    if kind == "cmd":
                        self.station.send_velocity(float(msg["v"]), float(msg["omega"]))
                    elif kind == "estop":
                        self.station.send_estop(bool(msg["engage"]))
                except (KeyError, TypeError, ValueError):
                    continue
                except ConnectionLost:
                    break
        finally:
            self.station.remove_listener(listener)


def _static_server(directory: str, port: int):
    handler = functools.partial(http.server.SimpleHTTPRequestHandler,
                                directory=directory)
    server = http.server.ThreadingHTTPServer(("127.0.0.1", port), handler)
    threading.Thread(target=server.serve_forever, name="console-ui", daemon=True).start()
    log.info("console UI at http://127.0.0.1:%d", port)
    return server
