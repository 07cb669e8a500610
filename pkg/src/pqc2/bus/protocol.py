"""Broker/node message layer carried inside channel frames.

One message per DATA frame. Registration is JSON (small, evolves freely);
publish and deliver are binary so the enclosed envelope bytes pass through
untouched: what the publisher sent is byte-for-byte what subscribers get.
"""

import json
import struct
from typing import List, Sequence, Tuple, Union

from pqc2.errors import ConfigError, ProtocolViolation

MSG_REGISTER = 1
MSG_REGISTER_RESULT = 2
MSG_PUBLISH = 3
MSG_DELIVER = 4

# run modes: which of the two security layers are active
MODE_NONE = "none"
MODE_APP_SIG = "app-sig"
MODE_CHANNEL = "channel"
MODE_BOTH = "both"
RUN_MODES = (MODE_NONE, MODE_APP_SIG, MODE_CHANNEL, MODE_BOTH)


def check_mode(mode: str) -> str:
    if mode not in RUN_MODES:
        raise ConfigError(f"unknown run mode {mode!r}; expected one of {RUN_MODES}")
    return mode


def mode_uses_channel(mode: str) -> bool:
    """True when connections handshake and frames are encrypted."""
    return check_mode(mode) in (MODE_CHANNEL, MODE_BOTH)


def mode_signs_envelopes(mode: str) -> bool:
    """True when application envelopes carry (and subscribers demand) signatures."""
    return check_mode(mode) in (MODE_APP_SIG, MODE_BOTH)


def encode_register(subject: str, publishes: Sequence[str],
                    subscribes: Sequence[str]) -> bytes:
    doc = {
        "subject": subject,
        "publish": list(publishes),
        "subscribe": list(subscribes),
    }
    body = json.dumps(doc, separators=(",", ":")).encode()
    return struct.pack(">BI", MSG_REGISTER, len(body)) + body


def encode_register_result(ok: bool, denied: Sequence[str] = (),
                           error: str = "") -> bytes:
    doc = {"ok": ok, "denied": list(denied), "error": error}
    body = json.dumps(doc, separators=(",", ":")).encode()
    return struct.pack(">BI", MSG_REGISTER_RESULT, len(body)) + body


def _encode_topic_envelope(msg_type: int, topic: str, envelope: bytes) -> bytes:
    topic_b = topic.encode()
    if len(topic_b) > 0xFFFF:
        raise ProtocolViolation("topic name too long")
    return (
        struct.pack(">BH", msg_type, len(topic_b))
        + topic_b
        + struct.pack(">I", len(envelope))
        + envelope
    )


def encode_publish(topic: str, envelope: bytes) -> bytes:
    return _encode_topic_envelope(MSG_PUBLISH, topic, envelope)


def encode_deliver(topic: str, envelope: bytes) -> bytes:
    return _encode_topic_envelope(MSG_DELIVER, topic, envelope)


def _decode_json(body: bytes, wanted: dict) -> dict:
    try:
        doc = json.loads(body.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolViolation(f"bad JSON message body: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtocolViolation("JSON message body must be an object")
    for key, typ in wanted.items():
        if key not in doc or not isinstance(doc[key], typ):
            raise ProtocolViolation(f"message field {key!r} missing or mistyped")
    return doc


ParsedMessage = Tuple[int, Union[dict, Tuple[str, bytes]]]


def parse_message(data: bytes) -> ParsedMessage:
    """Split one message into (type, payload).

    REGISTER / REGISTER_RESULT payloads are dicts; PUBLISH / DELIVER payloads
    are (topic, envelope bytes). Anything that does not parse exactly raises
    ProtocolViolation.
    """
    if not data:
        raise ProtocolViolation("empty message")
    msg_type = data[0]
    if msg_type in (MSG_REGISTER, MSG_REGISTER_RESULT):
        if len(data) < 5:
            raise ProtocolViolation("JSON message truncated")
        (length,) = struct.unpack_from(">I", data, 1)
        if len(data) != 5 + length:
            raise ProtocolViolation("JSON message length mismatch")
        if msg_type == MSG_REGISTER:
            doc = _decode_json(data[5:], {"subject": str, "publish": list, "subscribe": list})
            if not doc["subject"]:
                raise ProtocolViolation("registration subject is empty")
            topics: List[str] = doc["publish"] + doc["subscribe"]
            if not all(isinstance(t, str) for t in topics):
                raise ProtocolViolation("registration topics must be strings")
        else:
            doc = _decode_json(data[5:], {"ok": bool})
            doc.setdefault("denied", [])
            doc.setdefault("error", "")
        return msg_type, doc
    if msg_type in (MSG_PUBLISH, MSG_DELIVER):
        if len(data) < 3:
            raise ProtocolViolation("publish message truncated")
        (topic_len,) = struct.unpack_from(">H", data, 1)
        off = 3 + topic_len
        if len(data) < off + 4:
            raise ProtocolViolation("publish message truncated")
        try:
            topic = data[3:off].decode()
        except UnicodeDecodeError as exc:
            raise ProtocolViolation("topic is not valid UTF-8") from exc
        (env_len,) = struct.unpack_from(">I", data, off)
        off += 4
        if len(data) != off + env_len:
            raise ProtocolViolation("envelope length mismatch")
        return msg_type, (topic, data[off:])
    raise ProtocolViolation(f"unknown message type {msg_type}")
