"""Attack tooling: scripted adversary actions and what came of them.

Each attack reports what it attempted and what it could observe locally
(connections refused, frames pushed, bytes recovered). Whether the victim
actually accepted anything is judged by the scenario runner from the
victim-side logs; a well-defended run makes these functions fail, which is
the point.
"""

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

from pqc2 import channel, envelope
from pqc2.bus import protocol
from pqc2.bus.capture import capture_load, capture_scan
from pqc2.agents.runtime import Identity, connect_node
from pqc2.errors import ConnectionLost, NotAuthorized, Pqc2Error

log = logging.getLogger("pqc2.agents.attacker")

ATTACK_KINDS = ("forge", "tamper", "replay", "unauthorized_publish", "flood", "eavesdrop")


@dataclass
class AttackContext:
    host: str
    port: int
    mode: str
    identity: Identity                      # the attacker's own credentials
    impersonate: str = "ground_station"
    topic: str = "/command"
    count: int = 10
    captured: List[bytes] = field(default_factory=list)  # envelope wire bytes in hand
    capture_path: Optional[str] = None
    needle: Optional[bytes] = None
    channel_config: Optional[channel.ChannelConfig] = None


@dataclass
class AttackReport:
    kind: str
    attempted: int = 0
    sent: int = 0
    connected: bool = False
    registered: bool = False
    refusal: str = ""
    recovered: Optional[bytes] = None
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["recovered"] = self.recovered.hex() if self.recovered else None
        return doc


def run_attack(kind: str, ctx: AttackContext) -> AttackReport:
    try:
        fn = _DISPATCH[kind]
    except KeyError:
        raise ValueError(f"unknown attack kind {kind!r}; expected one of {ATTACK_KINDS}")
    return fn(ctx)


def _connect_as(ctx: AttackContext, subject: str, publishes=(), subscribes=()):
    """Dial the broker under an arbitrary claimed name. In secure modes the
    attacker still presents its own certificate, so a mismatched claim dies
    at registration."""
    identity = dataclasses.replace(ctx.identity, subject=subject)
    return connect_node(identity, ctx.host, ctx.port, ctx.mode,
                        publishes=publishes, subscribes=subscribes,
                        channel_config=ctx.channel_config)


def _imposter_publish(ctx: AttackContext, kind: str, make_wire) -> AttackReport:
    """Shared scaffold: register under a stolen name, then push count
    envelopes produced by make_wire(i)."""
    report = AttackReport(kind=kind, attempted=ctx.count)
    try:
        session = _connect_as(ctx, ctx.impersonate, publishes=[ctx.topic])
    except NotAuthorized as exc:
        report.refusal = f"registration refused: {exc}"
        return report
    except Pqc2Error as exc:
        report.refusal = f"{type(exc).__name__}: {exc}"
        return report
    report.connected = True
    report.registered = True
    with session:
        for i in range(ctx.count):
            wire = make_wire(i)
            if wire is None:
                report.notes.append("ran out of material")
                break
            try:
                session.publish(ctx.topic, wire)
            except (ConnectionLost, Pqc2Error) as exc:
                report.notes.append(f"send {i} failed: {exc}")
                break
            report.sent += 1
    return report


def attack_forge(ctx: AttackContext) -> AttackReport:
    """Commands under a stolen sender name, signed (if the mode signs) with
    a key the attacker made up."""
    seq = envelope.SeqCounter()
    signs = protocol.mode_signs_envelopes(ctx.mode)
    payload = b'{"v":1.5,"omega":0.0}'

    def make_wire(_i: int) -> bytes:
        if signs:
            env = envelope.seal(ctx.identity.keypair, ctx.impersonate, ctx.topic,
                                seq, payload)
        else:
            env = envelope.seal_unsigned(ctx.impersonate, ctx.topic, seq, payload)
        return envelope.encode_wire(env)

    return _imposter_publish(ctx, "forge", make_wire)


def attack_tamper(ctx: AttackContext) -> AttackReport:
    """Captured genuine envelopes with the payload bent, signature untouched."""
    if not ctx.captured:
        return AttackReport(kind="tamper", refusal="no captured envelopes to tamper with")
    sender = envelope.decode_wire(ctx.captured[0]).sender
    ctx = dataclasses.replace(ctx, impersonate=sender)

    def make_wire(i: int) -> bytes:
        env = envelope.decode_wire(ctx.captured[i % len(ctx.captured)])
        bent = bytearray(env.payload or b" ")
        bent[len(bent) // 2] ^= 0x01
        return envelope.encode_wire(dataclasses.replace(env, payload=bytes(bent)))

    return _imposter_publish(ctx, "tamper", make_wire)


def attack_replay(ctx: AttackContext) -> AttackReport:
    """Captured envelopes resent byte-for-byte."""
    if not ctx.captured:
        return AttackReport(kind="replay", refusal="no captured envelopes to replay")
    sender = envelope.decode_wire(ctx.captured[0]).sender
    ctx = dataclasses.replace(ctx, impersonate=sender)
    return _imposter_publish(ctx, "replay",
                             lambda i: ctx.captured[i % len(ctx.captured)])


def attack_unauthorized_publish(ctx: AttackContext) -> AttackReport:
    """Under the attacker's own (valid) identity: first try declaring the
    topic honestly, then smuggle publishes past the declaration step."""
    report = AttackReport(kind="unauthorized_publish", attempted=ctx.count)
    try:
        session = _connect_as(ctx, ctx.identity.subject, publishes=[ctx.topic])
        session.close()
        report.registered = True
        report.notes.append("registration unexpectedly allowed")
    except NotAuthorized as exc:
        report.notes.append(f"declared registration refused: {exc}")
    except Pqc2Error as exc:
        report.refusal = f"{type(exc).__name__}: {exc}"
        return report

    try:
        session = _connect_as(ctx, ctx.identity.subject)  # nothing declared
    except Pqc2Error as exc:
        report.refusal = f"bare connect failed: {type(exc).__name__}: {exc}"
        return report
    report.connected = True
    seq = envelope.SeqCounter()
    signs = protocol.mode_signs_envelopes(ctx.mode)
    with session:
        for i in range(ctx.count):
            if signs:
                env = envelope.seal(ctx.identity.keypair, ctx.identity.subject,
                                    ctx.topic, seq, b'{"v":2.0,"omega":0.0}')
            else:
                env = envelope.seal_unsigned(ctx.identity.subject, ctx.topic,
                                             seq, b'{"v":2.0,"omega":0.0}')
            msg = protocol.encode_publish(ctx.topic, envelope.encode_wire(env))
            try:
                session.raw_send(msg)  # bypasses the client's NotDeclared check
            except (ConnectionLost, Pqc2Error) as exc:
                report.notes.append(f"send {i} failed: {exc}")
                break
            report.sent += 1
    return report


def attack_flood(ctx: AttackContext) -> AttackReport:
    """Garbage messages as fast as the socket accepts them."""
    report = AttackReport(kind="flood", attempted=ctx.count)
    try:
        session = _connect_as(ctx, ctx.identity.subject)
    except Pqc2Error as exc:
        report.refusal = f"{type(exc).__name__}: {exc}"
        return report
    report.connected = True
    report.registered = True
    with session:
        for i in range(ctx.count):
            try:
                session.raw_send(os.urandom(64 + (i % 192)))
            except (ConnectionLost, Pqc2Error) as exc:
                report.notes.append(f"flood stopped at {i}: {exc}")
                break
            report.sent += 1
    return report


def attack_eavesdrop(ctx: AttackContext) -> AttackReport:
    """Read the wire capture and hunt for the payload marker."""
    report = AttackReport(kind="eavesdrop", attempted=1)
    if not ctx.capture_path or not ctx.needle:
        report.refusal = "need capture_path and needle"
        return report
    records = capture_load(ctx.capture_path)
    hits = capture_scan(records, ctx.needle)
    total = sum(len(r.data) for r in records)
    report.notes.append(f"{len(records)} records, {total} bytes, {len(hits)} marker hits")
    if hits:
        report.recovered = ctx.needle
    return report


_DISPATCH = {
    "forge": attack_forge,
    "tamper": attack_tamper,
    "replay": attack_replay,
    "unauthorized_publish": attack_unauthorized_publish,
    "flood": attack_flood,
    "eavesdrop": attack_eavesdrop,
}
