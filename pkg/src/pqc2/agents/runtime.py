"""Shared agent runtime: identity bundles and per-node envelope guards.

Certificates double as the public-key directory for application-layer
signatures: a subscriber resolves a sender's key from that sender's
certificate after checking it against the trust anchors once.
"""

import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Optional

from pqc2 import channel, envelope, pki
from pqc2.bus import protocol
from pqc2.bus.client import NodeConfig, Session, node_connect
from pqc2.bus.events import EventKind, EventLog
from pqc2.crypto import default_registry
from pqc2.crypto.types import SignatureKeyPair
from pqc2.errors import EnvelopeRejected, MalformedEnvelope

log = logging.getLogger("pqc2.agents")

# envelope reject reason -> event kind; staleness is a freshness violation,
# which the event taxonomy files under Replay
REASON_TO_KIND = {
    "UnknownSender": EventKind.UNKNOWN_SENDER,
    "BadSignature": EventKind.BAD_SIGNATURE,
    "Replay": EventKind.REPLAY,
    "Stale": EventKind.REPLAY,
}


@dataclass
class Identity:
    subject: str
    keypair: Optional[SignatureKeyPair] = None
    certificate: Optional[pki.Certificate] = None
    trust_store: Optional[pki.TrustStore] = None
    peer_certs: Dict[str, pki.Certificate] = field(default_factory=dict)

    def resolver(self, clock=time.time):
        """sender subject -> verified public key (None when unknown)."""
        cache: Dict[str, Optional[bytes]] = {}
        lock = threading.Lock()

        def resolve(sender: str) -> Optional[bytes]:
            with lock:
                if sender in cache:
                    return cache[sender]
                cert = self.peer_certs.get(sender)
                key: Optional[bytes] = None
                if cert is not None and cert.subject == sender:
                    if self.trust_store is None:
                        key = cert.public_key
                    elif pki.verify_certificate(self.trust_store, cert, int(clock())):
                        key = cert.public_key
                cache[sender] = key
                return key

        return resolve


class InboundGuard:
    """Verification funnel for received envelopes.

    In signing modes every envelope must carry a valid signature, pass the
    per-sender replay window, and satisfy the staleness policy; rejects are
    logged as SecurityEvents. In non-signing modes envelopes are accepted as
    parsed -- the insecure baseline the attack demos measure against.
    """

    def __init__(self, identity: Identity, mode: str,
                 event_log: Optional[EventLog] = None,
                 staleness: envelope.StalenessPolicy = envelope.StalenessPolicy(),
                 registry=default_registry):
        self.mode = protocol.check_mode(mode)
        self.verify = protocol.mode_signs_envelopes(mode)
        self.event_log = event_log if event_log is not None else EventLog()
        self.rejects: Counter = Counter()  # reason -> count
        self._resolve = identity.resolver()
        self._staleness = staleness
        self._registry = registry
        self._windows: Dict[str, envelope.ReplayWindow] = {}

    def open(self, wire: bytes, topic: str = "") -> Optional[envelope.Envelope]:
        """Envelope on success; None on any reject (already logged)."""
        try:
            env = envelope.decode_wire(wire)
        except MalformedEnvelope as exc:
            self.rejects["Malformed"] += 1
            self.event_log.append(EventKind.BAD_SIGNATURE, topic=topic,
                                  detail=f"undecodable envelope: {exc}")
            return None
        if not self.verify:
            return env
        window = self._windows.setdefault(env.sender, envelope.ReplayWindow())
        try:
            envelope.open_envelope(self._resolve, env, window,
                                   self._staleness, registry=self._registry)
        except EnvelopeRejected as exc:
            self.rejects[exc.reason] += 1
            self.event_log.append(
                REASON_TO_KIND.get(exc.reason, EventKind.BAD_SIGNATURE),
                subject=env.sender, topic=topic, detail=exc.detail or exc.reason,
            )
            return None
        return env


class Outbound:
    """Seals this identity's envelopes with one monotone sequence."""

    def __init__(self, identity: Identity, mode: str, registry=default_registry):
        self.identity = identity
        self.sign = protocol.mode_signs_envelopes(mode)
        if self.sign and identity.keypair is None:
            raise ValueError(f"mode {mode!r} signs envelopes but {identity.subject} has no key")
        self._seq = envelope.SeqCounter()
        self._registry = registry
        self._lock = threading.Lock()

    def seal(self, topic: str, payload: bytes) -> bytes:
        with self._lock:  # hash-based signing mutates key state
            if self.sign:
                env = envelope.seal(self.identity.keypair, self.identity.subject,
                                    topic, self._seq, payload, registry=self._registry)
            else:
                env = envelope.seal_unsigned(self.identity.subject, topic,
                                             self._seq, payload)
        return envelope.encode_wire(env)


def connect_node(identity: Identity, host: str, port: int, mode: str,
                 publishes=(), subscribes=(),
                 channel_config: Optional[channel.ChannelConfig] = None) -> Session:
    cfg = NodeConfig(
        subject=identity.subject, host=host, port=port, mode=mode,
        publishes=tuple(publishes), subscribes=tuple(subscribes),
        certificate=identity.certificate, keypair=identity.keypair,
        trust_store=identity.trust_store, channel_config=channel_config,
    )
    return node_connect(cfg)
