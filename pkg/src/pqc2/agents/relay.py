"""Relay agent: verify-then-forward across a trust boundary.

Subscribes an inbound command topic, verifies each envelope, and republishes
the payload onto the outbound topic under its own signature. Verification
failures drop the message. Provenance (the original sender) rides inside the
forwarded payload for audit, because downstream trusts the relay, not the
origin.
"""

import json
import logging
import threading
from dataclasses import dataclass
from typing import Optional

from pqc2 import channel
from pqc2.bus.events import EventLog
from pqc2.errors import ConnectionLost
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node

log = logging.getLogger("pqc2.agents.relay")


@dataclass
class RelayConfig:
    identity: Identity
    host: str
    port: int
    mode: str = "none"
    in_topic: str = "/command_in"
    out_topic: str = "/command"
    channel_config: Optional[channel.ChannelConfig] = None
    event_log: Optional[EventLog] = None


class RelayAgent:
    def __init__(self, config: RelayConfig):
        self.config = config
        self.event_log = config.event_log if config.event_log is not None else EventLog()
        self._guard = InboundGuard(config.identity, config.mode, self.event_log)
        self._outbound = Outbound(config.identity, config.mode)
        self._session = None
        self._thread: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self.forwarded = 0
        self.dropped = 0

    def start(self) -> "RelayAgent":
        self._session = connect_node(
            self.config.identity, self.config.host, self.config.port, self.config.mode,
            publishes=[self.config.out_topic],
            subscribes=[self.config.in_topic],
            channel_config=self.config.channel_config,
        )
        self._thread = threading.Thread(target=self._forward_loop, name="relay", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._session is not None:
            self._session.close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "RelayAgent":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _forward_loop(self) -> None:
        while not self._stop.is_set():
            try:
                wire = self._session.next_envelope(self.config.in_topic, timeout=0.25)
            except TimeoutError:
                continue
            except ConnectionLost:
                return
            env = self._guard.open(wire, self.config.in_topic)
            if env is None:
                self.dropped += 1
                continue
            try:
                doc = json.loads(env.payload.decode())
                if not isinstance(doc, dict):
                    raise ValueError("payload is not a JSON object")
            except (UnicodeDecodeError, json.JSONDecodeError, ValueError) as exc:
                self.dropped += 1
                log.warning("unforwardable payload from %s: %s", env.sender, exc)
                continue
            doc["origin"] = env.sender
            doc["via"] = self.config.identity.subject
            out = self._outbound.seal(
                self.config.out_topic, json.dumps(doc, separators=(",", ":")).encode()
            )
            try:
                self._session.publish(self.config.out_topic, out)
            except ConnectionLost:
                return
            self.forwarded += 1
