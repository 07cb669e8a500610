"""Security-event log: append-only record of rejected traffic.

Every deny, drop, or failed handshake anywhere in the system lands here so a
scripted attack run can be audited afterwards. One JSON object per line when
a path is attached; always mirrored in memory for in-process inspection.
"""

import json
import threading
import time
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional


class EventKind(str, Enum):
    AUTHZ_DENIED = "AuthzDenied"
    BAD_SIGNATURE = "BadSignature"
    REPLAY = "Replay"
    UNKNOWN_SENDER = "UnknownSender"
    HANDSHAKE_FAILED = "HandshakeFailed"
    PLAINTEXT_REJECTED = "PlaintextRejected"
    # emitted when a bounded delivery queue drops a frame (flood containment)
    QUEUE_OVERFLOW = "QueueOverflow"

    def __str__(self) -> str:  # JSON + log lines want the bare name
        return self.value


@dataclass(frozen=True)
class SecurityEvent:
    ts: float
    kind: EventKind
    subject: str
    topic: str
    detail: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "ts": self.ts,
                "kind": self.kind.value,
                "subject": self.subject,
                "topic": self.topic,
                "detail": self.detail,
            },
            separators=(",", ":"),
        )


class EventLog:
    """Thread-safe append-only event sink, optionally mirrored to JSONL."""

    def __init__(self, path: Optional[str] = None):
        self._lock = threading.Lock()
        self._events: List[SecurityEvent] = []
        self._last_ts = 0.0
        self._fh = open(path, "a", encoding="utf-8") if path else None

    def append(self, kind: EventKind, subject: str = "", topic: str = "",
               detail: str = "") -> SecurityEvent:
        with self._lock:
            # clamp so timestamps never run backwards within one log
            ts = max(time.time(), self._last_ts)
            self._last_ts = ts
            event = SecurityEvent(ts, EventKind(kind), subject, topic, detail)
            self._events.append(event)
            if self._fh is not None:
                self._fh.write(event.to_json() + "\n")
                self._fh.flush()
        return event

    def events(self) -> List[SecurityEvent]:
        with self._lock:
            return list(self._events)

    def count(self, kind: EventKind) -> int:
        with self._lock:
            return sum(1 for e in self._events if e.kind == kind)

    def counts(self) -> Counter:
        with self._lock:
            return Counter(e.kind for e in self._events)

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


def event_log_load(path: str) -> List[SecurityEvent]:
    """Parse a JSONL event file back into SecurityEvent records."""
    out: List[SecurityEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                SecurityEvent(
                    ts=float(obj["ts"]),
                    kind=EventKind(obj["kind"]),
                    subject=obj.get("subject", ""),
                    topic=obj.get("topic", ""),
                    detail=obj.get("detail", ""),
                )
            )
    return out


def merge_events(*logs: Iterable[SecurityEvent]) -> List[SecurityEvent]:
    """Combine event streams from several sources into one timeline."""
    merged = [e for log in logs for e in log]
    merged.sort(key=lambda e: e.ts)
    return merged
