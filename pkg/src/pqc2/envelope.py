"""Application-layer signed message format with anti-replay.

A command travels as an Envelope: the canonical byte serialization of
(version, sender, topic, seq, timestamp, scheme, payload) is signed, so
every mutable field is covered and nothing unauthenticated rides along.
Subscribers drop anything that fails verification and never execute it.

Canonical signing bytes, big-endian:

    "pqc2-envelope-v1" || u8 version
    || u16 len || sender || u16 len || topic
    || u64 seq || u64 timestamp_ms || u16 scheme_id
    || u32 len || payload

Wire encoding prepends magic "PQC2" and appends the signature:

    "PQC2" || canonical || u32 sig_len || sig || (u16 ots_index iff scheme 1)

scheme_id 0 marks an unsigned envelope (sig_len 0): transport modes that
rely on channel security alone still move payloads in the same framing.

Replay defense: sequence numbers start at 1 and a 64-wide sliding window
(IPsec-style) tracks what has been accepted; sequence 0 is born used.
"""

from __future__ import annotations

import struct
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from pqc2.crypto import default_registry
from pqc2.crypto.types import SchemeKind, Signature, SignatureKeyPair
from pqc2.errors import EnvelopeRejected, FieldTooLong, MalformedEnvelope

MAGIC = b"PQC2"
CANONICAL_PREFIX = b"pqc2-envelope-v1"
VERSION = 1
UNSIGNED_SCHEME_ID = 0

UNKNOWN_SENDER = "UnknownSender"
BAD_SIGNATURE = "BadSignature"
REPLAY = "Replay"
STALE = "Stale"

_MASK64 = (1 << 64) - 1


def now_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass(frozen=True)
class Envelope:
    version: int
    sender: str
    topic: str
    seq: int
    timestamp_ms: int
    scheme_id: int
    payload: bytes
    signature: Optional[Signature] = None

    def canonical(self) -> bytes:
        return canonical_bytes(
            self.version, self.sender, self.topic, self.seq,
            self.timestamp_ms, self.scheme_id, self.payload,
        )


def canonical_bytes(version: int, sender: str, topic: str, seq: int,
                    timestamp_ms: int, scheme_id: int, payload: bytes) -> bytes:
    sender_b = sender.encode()
    topic_b = topic.encode()
    if len(sender_b) > 0xFFFF:
        raise FieldTooLong(f"sender is {len(sender_b)} bytes, limit 65535")
    if len(topic_b) > 0xFFFF:
        raise FieldTooLong(f"topic is {len(topic_b)} bytes, limit 65535")
    if len(payload) > 0xFFFFFFFF:
        raise FieldTooLong(f"payload is {len(payload)} bytes, limit 2^32-1")
    return b"".join(
        (
            CANONICAL_PREFIX,
            struct.pack(">B", version),
            struct.pack(">H", len(sender_b)),
            sender_b,
            struct.pack(">H", len(topic_b)),
            topic_b,
            struct.pack(">QQH", seq, timestamp_ms, scheme_id),
            struct.pack(">I", len(payload)),
            payload,
        )
    )


class SeqCounter:
    """Per-sender monotone counter; sequence numbers start at 1."""

    def __init__(self, start: int = 1):
        self._next = start
        self._lock = threading.Lock()

    def take(self) -> int:
        with self._lock:
            value = self._next
            self._next += 1
            return value

    def peek(self) -> int:
        return self._next


class ReplayWindow:
    """64-wide sliding acceptance window over sequence numbers.

    Bit i of the mask marks (highest_seq - i) as already accepted; bit 0 is
    set at construction so that sequence 0 is never accepted.
    """

    WIDTH = 64

    def __init__(self):
        self.highest_seq = 0
        self.seen_bitmap = 1

    def would_accept(self, seq: int) -> bool:
        if seq > self.highest_seq:
            return True
        diff = self.highest_seq - seq
        if diff >= self.WIDTH:
            return False
        return not (self.seen_bitmap >> diff) & 1

    def accept(self, seq: int) -> None:
        if seq > self.highest_seq:
            shift = seq - self.highest_seq
            self.seen_bitmap = ((self.seen_bitmap << shift) | 1) & _MASK64
            self.highest_seq = seq
        else:
            self.seen_bitmap |= 1 << (self.highest_seq - seq)


def replay_check(window: ReplayWindow, seq: int) -> bool:
    """Accept-and-commit in one step; True means the seq was fresh."""
    if not window.would_accept(seq):
        return False
    window.accept(seq)
    return True


@dataclass(frozen=True)
class StalenessPolicy:
    """Timestamp skew limit; disabled by default because simulated clocks
    make wall-time comparisons meaningless and seq is the real defense."""

    max_skew_ms: Optional[int] = None

    def fresh(self, timestamp_ms: int, now: Optional[int] = None) -> bool:
        if self.max_skew_ms is None:
            return True
        if now is None:
            now = now_ms()
        return abs(now - timestamp_ms) <= self.max_skew_ms


def _check_fields(sender: str, topic: str) -> None:
    if not sender:
        raise ValueError("sender must be non-empty")
    if not topic.startswith("/"):
        raise ValueError(f"topic must start with '/', got {topic!r}")


def seal(keypair: SignatureKeyPair, sender: str, topic: str,
         seq_counter: SeqCounter, payload: bytes,
         clock: Callable[[], int] = now_ms,
         registry=default_registry) -> Envelope:
    _check_fields(sender, topic)
    provider = registry.get(keypair.scheme_id, SchemeKind.SIGNATURE)
    seq = seq_counter.take()
    ts = clock()
    canonical = canonical_bytes(
        VERSION, sender, topic, seq, ts, keypair.scheme_id, payload
    )
    sig = provider.sign(keypair, canonical)
    return Envelope(VERSION, sender, topic, seq, ts, keypair.scheme_id, payload, sig)


def seal_unsigned(sender: str, topic: str, seq_counter: SeqCounter,
                  payload: bytes, clock: Callable[[], int] = now_ms) -> Envelope:
    _check_fields(sender, topic)
    return Envelope(
        VERSION, sender, topic, seq_counter.take(), clock(),
        UNSIGNED_SCHEME_ID, payload, None,
    )


def open_envelope(resolver: Callable[[str], Optional[bytes]], env: Envelope,
                  window: ReplayWindow,
                  policy: StalenessPolicy = StalenessPolicy(),
                  now: Optional[int] = None,
                  registry=default_registry) -> bytes:
    """Verify-then-accept; raises EnvelopeRejected with one of the four
    distinct reasons. The window is mutated only on full acceptance."""
    public_key = resolver(env.sender)
    if public_key is None:
        raise EnvelopeRejected(UNKNOWN_SENDER, env.sender)
    if env.signature is None or env.scheme_id == UNSIGNED_SCHEME_ID:
        raise EnvelopeRejected(BAD_SIGNATURE, "envelope is unsigned")
    try:
        provider = registry.get(env.scheme_id, SchemeKind.SIGNATURE)
    except Exception:
        raise EnvelopeRejected(BAD_SIGNATURE, f"scheme {env.scheme_id}") from None
    if not provider.verify(public_key, env.canonical(), env.signature):
        raise EnvelopeRejected(BAD_SIGNATURE, "signature does not verify")
    if not window.would_accept(env.seq):
        raise EnvelopeRejected(REPLAY, f"seq {env.seq}")
    if not policy.fresh(env.timestamp_ms, now):
        raise EnvelopeRejected(STALE, f"timestamp {env.timestamp_ms}")
    window.accept(env.seq)
    return env.payload


def encode_wire(env: Envelope) -> bytes:
    out = MAGIC + env.canonical()
    if env.scheme_id == UNSIGNED_SCHEME_ID or env.signature is None:
        return out + struct.pack(">I", 0)
    out += struct.pack(">I", len(env.signature.data)) + env.signature.data
    if env.scheme_id == 1:
        if env.signature.ots_index is None:
            raise MalformedEnvelope("scheme 1 signature lacks its leaf index")
        out += struct.pack(">H", env.signature.ots_index)
    return out


def decode_wire(data: bytes) -> Envelope:
    try:
        if data[:4] != MAGIC:
            raise MalformedEnvelope("bad magic")
        off = 4
        if data[off : off + 16] != CANONICAL_PREFIX:
            raise MalformedEnvelope("bad canonical prefix")
        off += 16
        version = data[off]
        off += 1
        if version != VERSION:
            raise MalformedEnvelope(f"unsupported version {version}")
        (sender_len,) = struct.unpack_from(">H", data, off)
        off += 2
        sender_b = data[off : off + sender_len]
        if len(sender_b) != sender_len:
            raise MalformedEnvelope("sender truncated")
        off += sender_len
        (topic_len,) = struct.unpack_from(">H", data, off)
        off += 2
        topic_b = data[off : off + topic_len]
        if len(topic_b) != topic_len:
            raise MalformedEnvelope("topic truncated")
        off += topic_len
        seq, timestamp_ms, scheme_id = struct.unpack_from(">QQH", data, off)
        off += 18
        (payload_len,) = struct.unpack_from(">I", data, off)
        off += 4
        payload = data[off : off + payload_len]
        if len(payload) != payload_len:
            raise MalformedEnvelope("payload truncated")
        off += payload_len
        (sig_len,) = struct.unpack_from(">I", data, off)
        off += 4
        sig_bytes = data[off : off + sig_len]
        if len(sig_bytes) != sig_len:
            raise MalformedEnvelope("signature truncated")
        off += sig_len
        signature = None
        if scheme_id == UNSIGNED_SCHEME_ID:
            if sig_len != 0:
                raise MalformedEnvelope("unsigned envelope carries a signature")
        else:
            ots_index = None
            if scheme_id == 1:
                (ots_index,) = struct.unpack_from(">H", data, off)
                off += 2
            signature = Signature(scheme_id, sig_bytes, ots_index)
        if off != len(data):
            raise MalformedEnvelope("trailing bytes")
        sender = sender_b.decode()
        topic = topic_b.decode()
        if not sender:
            raise MalformedEnvelope("empty sender")
        if not topic.startswith("/"):
            raise MalformedEnvelope("topic must start with '/'")
        return Envelope(version, sender, topic, seq, timestamp_ms, scheme_id,
                        payload, signature)
    except MalformedEnvelope:
        raise
    except Exception as exc:
        # struct.error, UnicodeDecodeError, IndexError: all malformed
        raise MalformedEnvelope(str(exc)) from exc
