"""Monitoring agent: watches /status and can slam the e-stop.

Passive by default; an optional watchdog rule auto-engages the e-stop when a
verified status violates it (e.g. the agent leaves a safety region).
"""

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from pqc2 import channel
from pqc2.bus.events import EventLog
from pqc2.errors import ConnectionLost
from pqc2.agents import model
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node

log = logging.getLogger("pqc2.agents.monitor")


@dataclass
class MonitorConfig:
    identity: Identity
    host: str
    port: int
    mode: str = "none"
    estop_topic: str = "/e-stop"
    status_topic: str = "/status"
    # return True to trigger an automatic e-stop
    watchdog: Optional[Callable[[dict], bool]] = None
    channel_config: Optional[channel.ChannelConfig] = None
    event_log: Optional[EventLog] = None


class Monitor:
    def __init__(self, config: MonitorConfig):
        self.config = config
        self.event_log = config.event_log if config.event_log is not None else EventLog()
        self._guard = InboundGuard(config.identity, config.mode, self.event_log)
        self._outbound = Outbound(config.identity, config.mode)
        self._session = None
        self._thread: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self.latest_status: Optional[dict] = None
        self.status_count = 0
        self.auto_estops = 0

    def start(self) -> "Monitor":
        self._session = connect_node(
            self.config.identity, self.config.host, self.config.port, self.config.mode,
            publishes=[self.config.estop_topic],
            subscribes=[self.config.status_topic],
            channel_config=self.config.channel_config,
        )
        self._thread = threading.Thread(target=self._watch_loop, name="monitor", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._session is not None:
            self._session.close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "Monitor":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def send_estop(self, engage: bool) -> None:
        wire = self._outbound.seal(self.config.estop_topic, model.estop_payload(engage))
        self._session.publish(self.config.estop_topic, wire)

    def _watch_loop(self) -> None:
        while not self._stop.is_set():
            try:
                wire = self._session.next_envelope(self.config.status_topic, timeout=0.25)
            except TimeoutError:
                continue
            except ConnectionLost:
                return
            env = self._guard.open(wire, self.config.status_topic)
            if env is None:
                continue
            try:
                status = model.parse_status(env.payload)
            except ValueError as exc:
                log.warning("bad status payload from %s: %s", env.sender, exc)
                continue
            with self._lock:
                self.latest_status = status
                self.status_count += 1
            if self.config.watchdog is not None and self.config.watchdog(status):
                with self._lock:
                    self.auto_estops += 1
                try:
                    self.send_estop(True)
                except ConnectionLost:
                    return
