"""Broker-mediated publish/subscribe transport.

Star topology: every node dials one broker, registers its identity and
declared topics, and exchanges length-prefixed frames (secure or plaintext
per the run mode). The broker enforces authorization at registration and
again on every publish, routes envelopes byte-identically, logs security
events, and can tap the wire into a capture file for offline inspection.
"""

from pqc2.bus.broker import Broker, BrokerConfig
from pqc2.bus.capture import CaptureRecord, CaptureWriter, capture_load, capture_scan
from pqc2.bus.client import NodeConfig, Session, node_connect
from pqc2.bus.events import EventKind, EventLog, SecurityEvent

__all__ = [
    "Broker",
    "BrokerConfig",
    "CaptureRecord",
    "CaptureWriter",
    "capture_load",
    "capture_scan",
    "EventKind",
    "EventLog",
    "SecurityEvent",
    "NodeConfig",
    "Session",
    "node_connect",
]
