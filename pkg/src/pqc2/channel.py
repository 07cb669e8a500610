"""Point-to-point secure channel: mutual certificate authentication,
cipher-suite negotiation, KEM key exchange, and AEAD framing.

Three-message handshake over length-prefixed frames:

    initiator                               responder
    CLIENT_HELLO  {ver, nonce_c, suites, cert_i}  -->
                  <--  SERVER_HELLO {nonce_s, suite, cert_r, kem_pub, sig_r}
    CLIENT_FINISH {kem_ct, sig_i}  -->
    DATA ...                                DATA ...

Both sides keep a running SHA-256 transcript of the full frame bytes.  The
responder signs "pqc2-hs-v1 responder" || transcript-digest-after-hello ||
its unsigned body; the initiator signs "pqc2-hs-v1 initiator" ||
transcript-digest-after-server-hello || its unsigned body.  Signing a
transcript digest rather than the live message alone means a single flipped
bit anywhere earlier in the exchange invalidates every later signature.

Session keys come from HKDF: extract("pqc2-hs-v1", shared_secret || nonce_c
|| nonce_s), then expand with direction labels.  DATA frames carry an
explicit u64 counter; the AEAD nonce is the direction IV with the counter
XORed into its last 8 bytes, and the counter is authenticated as AAD, so
reordering or replaying frames fails loudly.

Frame wire format: u32 BE length || u8 frame_type || body, where length
covers type+body. Bodies over 16 MiB are refused in both directions.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import yaml

from pqc2 import pki
from pqc2.crypto import default_registry
from pqc2.crypto.kdf import hkdf_expand, hkdf_extract
from pqc2.crypto.types import SchemeKind, SessionKeys, Signature, SignatureKeyPair
from pqc2.errors import (
    BadCertificate,
    BadTranscriptSignature,
    ChannelAlert,
    ConfigError,
    CounterExhausted,
    DecapsulationFailure,
    FrameRejected,
    NoCommonSuite,
    ProtocolViolation,
)

log = logging.getLogger("pqc2.channel")

# frame types
CLIENT_HELLO = 1
SERVER_HELLO = 2
CLIENT_FINISH = 3
DATA = 4
ALERT = 5

MAX_BODY = 16 * 1024 * 1024
PROTOCOL_VERSION = 1
NONCE_LEN = 32

_HS_SALT = b"pqc2-hs-v1"
_DOMAIN_RESPONDER = b"pqc2-hs-v1 responder"
_DOMAIN_INITIATOR = b"pqc2-hs-v1 initiator"

_MAX_COUNTER = 2**64 - 1

# alert reason codes (one byte on the wire, no free text)
ALERT_BAD_CERTIFICATE = 1
ALERT_BAD_SIGNATURE = 2
ALERT_NO_COMMON_SUITE = 3
ALERT_DECAPSULATION = 4
ALERT_PROTOCOL = 5
ALERT_INTERNAL = 6

INITIATOR = "initiator"
RESPONDER = "responder"

PLAINTEXT = "plaintext"
SECURE = "secure"


# frame codec

def encode_frame(frame_type: int, body: bytes) -> bytes:
    if len(body) > MAX_BODY:
        raise ProtocolViolation(f"frame body {len(body)} exceeds 16 MiB")
    return struct.pack(">IB", 1 + len(body), frame_type) + body


def decode_frame(data: bytes) -> Tuple[int, bytes]:
    if len(data) < 5:
        raise ProtocolViolation("frame shorter than header")
    (length,) = struct.unpack_from(">I", data, 0)
    if length < 1 or length - 1 > MAX_BODY:
        raise ProtocolViolation(f"bad frame length {length}")
    if len(data) != 4 + length:
        raise ProtocolViolation("frame length mismatch")
    return data[4], data[5:]


def read_frame(read_exact: Callable[[int], bytes]) -> Tuple[int, bytes, bytes]:
    """Pull one frame off a stream; returns (type, body, raw frame bytes).
    read_exact(n) must return exactly n bytes or raise."""
    header = read_exact(4)
    (length,) = struct.unpack(">I", header)
    if length < 1 or length - 1 > MAX_BODY:
        raise ProtocolViolation(f"bad frame length {length}")
    rest = read_exact(length)
    return rest[0], rest[1:], header + rest


# cipher suites

@dataclass(frozen=True)
class CipherSuite:
    signature_scheme_id: int
    kem_scheme_id: int
    aead_scheme_id: int

    def validate(self, registry=default_registry) -> "CipherSuite":
        registry.get(self.signature_scheme_id, SchemeKind.SIGNATURE)
        registry.get(self.kem_scheme_id, SchemeKind.KEM)
        registry.get(self.aead_scheme_id, SchemeKind.AEAD)
        return self

    def encode(self) -> bytes:
        return struct.pack(
            ">HHH", self.signature_scheme_id, self.kem_scheme_id, self.aead_scheme_id
        )

    @classmethod
    def decode(cls, data: bytes) -> "CipherSuite":
        return cls(*struct.unpack(">HHH", data))

    def describe(self, registry=default_registry) -> str:
        names = [
            registry.descriptor(self.signature_scheme_id).name,
            registry.descriptor(self.kem_scheme_id).name,
            registry.descriptor(self.aead_scheme_id).name,
        ]
        return "+".join(names)


SUITE_PQ = CipherSuite(1, 3, 16)
SUITE_CLASSICAL = CipherSuite(2, 3, 16)
DEFAULT_SUITES = [SUITE_PQ, SUITE_CLASSICAL]


@dataclass
class ChannelConfig:
    suites: List[CipherSuite] = field(default_factory=lambda: list(DEFAULT_SUITES))
    mode: str = SECURE
    trap_all: bool = True

    def __post_init__(self):
        if self.mode not in (SECURE, PLAINTEXT):
            raise ConfigError(f"unknown channel mode {self.mode!r}")
        if not self.suites:
            raise ConfigError("at least one cipher suite required")


def channel_mode(config: ChannelConfig) -> str:
    if config.mode == PLAINTEXT:
        log.warning(
            "PLAINTEXT channel mode: frames cross the wire unencrypted and "
            "unauthenticated; demo use only"
        )
    return config.mode


def load_suite_config(text: str, registry=default_registry) -> ChannelConfig:
    """Parse the YAML suite list: ordered {sig, kem, aead} triples by scheme
    name plus an optional trap_all flag."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad suite YAML: {exc}") from exc
    if doc is None:
        return ChannelConfig()
    if not isinstance(doc, dict):
        raise ConfigError("suite config must be a mapping")
    suites = []
    for entry in doc.get("suites", []):
        if not isinstance(entry, dict) or set(entry) != {"sig", "kem", "aead"}:
            raise ConfigError(f"suite entry needs sig/kem/aead, got {entry!r}")
        suite = CipherSuite(
            registry.by_name(entry["sig"], SchemeKind.SIGNATURE).descriptor.scheme_id,
            registry.by_name(entry["kem"], SchemeKind.KEM).descriptor.scheme_id,
            registry.by_name(entry["aead"], SchemeKind.AEAD).descriptor.scheme_id,
        )
        suites.append(suite)
    mode = doc.get("mode", SECURE)
    trap_all = bool(doc.get("trap_all", True))
    return ChannelConfig(suites=suites or list(DEFAULT_SUITES), mode=mode,
                         trap_all=trap_all)


def negotiate_suite(offered: List[CipherSuite],
                    local_policy: List[CipherSuite]) -> CipherSuite:
    """Responder preference order: first local suite present in the offer."""
    offered_set = set(offered)
    for suite in local_policy:
        if suite in offered_set:
            return suite
    raise NoCommonSuite(f"no overlap between {len(offered)} offered and local policy")


# session keys and the security association

def derive_session_keys(shared_secret: bytes, nonce_c: bytes, nonce_s: bytes) -> SessionKeys:
    prk = hkdf_extract(_HS_SALT, shared_secret + nonce_c + nonce_s)
    return SessionKeys(
        c2s_key=hkdf_expand(prk, b"c2s key", 32),
        s2c_key=hkdf_expand(prk, b"s2c key", 32),
        c2s_iv=hkdf_expand(prk, b"c2s iv", 12),
        s2c_iv=hkdf_expand(prk, b"s2c iv", 12),
    )


def _xor_counter(iv: bytes, counter: int) -> bytes:
    head, tail = iv[:4], int.from_bytes(iv[4:], "big")
    return head + (tail ^ counter).to_bytes(8, "big")


class SecurityAssociation:
    """Established session state for one connection direction pair."""

    def __init__(self, suite: CipherSuite, keys: SessionKeys, peer_subject: str,
                 is_initiator: bool, established_at: float,
                 registry=default_registry):
        from pqc2.envelope import ReplayWindow  # shared sliding-window logic

        self.suite = suite
        self.keys = keys
        self.peer_subject = peer_subject
        self.is_initiator = is_initiator
        self.established_at = established_at
        self.send_counter = 0
        self.recv_window = ReplayWindow()
        self._aead = registry.get(suite.aead_scheme_id, SchemeKind.AEAD)
        if is_initiator:
            self._send_key, self._send_iv = keys.c2s_key, keys.c2s_iv
            self._recv_key, self._recv_iv = keys.s2c_key, keys.s2c_iv
        else:
            self._send_key, self._send_iv = keys.s2c_key, keys.s2c_iv
            self._recv_key, self._recv_iv = keys.c2s_key, keys.c2s_iv

    def seal_frame(self, plaintext: bytes) -> bytes:
        if self.send_counter >= _MAX_COUNTER:
            raise CounterExhausted("DATA counter exhausted; reconnect required")
        counter = self.send_counter
        self.send_counter += 1
        nonce = _xor_counter(self._send_iv, counter)
        aad = struct.pack(">BQ", DATA, counter)
        ct = self._aead.seal(self._send_key, nonce, aad, plaintext)
        return encode_frame(DATA, struct.pack(">Q", counter) + ct)

    def open_frame(self, frame_bytes: bytes) -> bytes:
        frame_type, body = decode_frame(frame_bytes)
        return self.open_body(frame_type, body)

    def open_body(self, frame_type: int, body: bytes) -> bytes:
        if frame_type == ALERT:
            raise ChannelAlert(body[0] if body else ALERT_INTERNAL)
        if frame_type != DATA:
            raise ProtocolViolation(f"expected DATA frame, got type {frame_type}")
        if len(body) < 8:
            raise ProtocolViolation("DATA frame too short for its counter")
        (counter,) = struct.unpack_from(">Q", body, 0)
        # counter n maps to window seq n+1 (seq 0 is the window's never-valid slot)
        if not self.recv_window.would_accept(counter + 1):
            raise FrameRejected("Replay", f"counter {counter}")
        nonce = _xor_counter(self._recv_iv, counter)
        aad = struct.pack(">BQ", DATA, counter)
        plaintext = self._aead.open(self._recv_key, nonce, aad, body[8:])
        self.recv_window.accept(counter + 1)
        return plaintext


def alert_frame(code: int) -> bytes:
    return encode_frame(ALERT, bytes([code]))


# handshake state machine

PHASE_START = "start"
PHASE_HELLO_SENT = "hello_sent"
PHASE_HELLO_RECEIVED = "hello_received"
PHASE_FINISHED = "finished"
PHASE_FAILED = "failed"


class HandshakeState:
    def __init__(self, role: str, config: ChannelConfig, my_cert: pki.Certificate,
                 my_keypair: SignatureKeyPair, trust_store: pki.TrustStore,
                 registry=default_registry):
        if my_cert.public_key != my_keypair.public_key:
            raise ConfigError("certificate does not match the signing key")
        usable = [
            s for s in config.suites
            if s.signature_scheme_id == my_keypair.scheme_id
        ]
        if not usable:
            raise ConfigError(
                f"no configured suite uses signature scheme {my_keypair.scheme_id}"
            )
        for suite in usable:
            suite.validate(registry)
        self.role = role
        self.phase = PHASE_START
        self.config = config
        self.suites = usable
        self.my_cert = my_cert
        self.my_keypair = my_keypair
        self.trust_store = trust_store
        self.registry = registry
        self.transcript = hashlib.sha256()
        self.my_nonce: Optional[bytes] = None
        self.peer_nonce: Optional[bytes] = None
        self.peer_cert: Optional[pki.Certificate] = None
        self.chosen_suite: Optional[CipherSuite] = None
        self.ephemeral_kem = None  # responder only
        self.pending_alert: Optional[bytes] = None

    def _absorb(self, frame_bytes: bytes) -> None:
        self.transcript.update(frame_bytes)

    def _digest(self) -> bytes:
        return self.transcript.copy().digest()

    def fail(self, alert_code: int, exc: Exception) -> Exception:
        self.phase = PHASE_FAILED
        self.pending_alert = alert_frame(alert_code)
        return exc


def _encode_sigblob(sig: Signature) -> bytes:
    head = struct.pack(">H", sig.scheme_id)
    if sig.ots_index is not None:
        head += struct.pack(">H", sig.ots_index)
    return head + sig.data


def _decode_sigblob(blob: bytes) -> Signature:
    (scheme_id,) = struct.unpack_from(">H", blob, 0)
    off = 2
    ots_index = None
    if scheme_id == 1:
        (ots_index,) = struct.unpack_from(">H", blob, 2)
        off = 4
    return Signature(scheme_id, blob[off:], ots_index)


class _BodyReader:
    """Sequential parser; any overrun raises ProtocolViolation."""

    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        chunk = self.data[self.off : self.off + n]
        if len(chunk) != n:
            raise ProtocolViolation("handshake body truncated")
        self.off += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32_block(self) -> bytes:
        (n,) = struct.unpack(">I", self.take(4))
        return self.take(n)

    def finish(self) -> None:
        if self.off != len(self.data):
            raise ProtocolViolation("trailing bytes in handshake body")


def _u32_block(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def handshake_initiate(config: ChannelConfig, my_cert: pki.Certificate,
                       my_keypair: SignatureKeyPair, trust_store: pki.TrustStore,
                       registry=default_registry,
                       rng: Callable[[int], bytes] = None) -> Tuple[HandshakeState, bytes]:
    state = HandshakeState(INITIATOR, config, my_cert, my_keypair, trust_store, registry)
    state.my_nonce = (rng or os.urandom)(NONCE_LEN)
    body = struct.pack(">B", PROTOCOL_VERSION)
    body += state.my_nonce
    body += struct.pack(">B", len(state.suites))
    for suite in state.suites:
        body += suite.encode()
    body += _u32_block(pki.cert_encode(my_cert))
    frame = encode_frame(CLIENT_HELLO, body)
    state._absorb(frame)
    state.phase = PHASE_HELLO_SENT
    return state, frame


def handshake_respond(config: ChannelConfig, my_cert: pki.Certificate,
                      my_keypair: SignatureKeyPair, trust_store: pki.TrustStore,
                      registry=default_registry) -> HandshakeState:
    return HandshakeState(RESPONDER, config, my_cert, my_keypair, trust_store, registry)


def _verify_peer_cert(state: HandshakeState, cert_bytes: bytes,
                      now: float) -> pki.Certificate:
    try:
        cert = pki.cert_decode(cert_bytes)
    except Exception as exc:
        raise state.fail(ALERT_BAD_CERTIFICATE, BadCertificate(f"undecodable: {exc}"))
    decision = pki.verify_certificate(state.trust_store, cert, int(now))
    if not decision.allow:
        raise state.fail(ALERT_BAD_CERTIFICATE, BadCertificate(decision.reason))
    return cert


def _sign_transcript(state: HandshakeState, domain: bytes, body_unsigned: bytes) -> bytes:
    provider = state.registry.get(state.my_keypair.scheme_id, SchemeKind.SIGNATURE)
    sig = provider.sign(state.my_keypair, domain + state._digest() + body_unsigned)
    return _encode_sigblob(sig)


def _verify_transcript_sig(state: HandshakeState, domain: bytes, body_unsigned: bytes,
                           sigblob: bytes, suite: CipherSuite) -> None:
    cert = state.peer_cert
    try:
        sig = _decode_sigblob(sigblob)
    except Exception as exc:
        raise state.fail(ALERT_BAD_SIGNATURE, BadTranscriptSignature(str(exc)))
    if sig.scheme_id != suite.signature_scheme_id or cert.scheme_id != sig.scheme_id:
        raise state.fail(
            ALERT_BAD_SIGNATURE,
            BadTranscriptSignature("signature scheme does not match the suite"),
        )
    provider = state.registry.get(sig.scheme_id, SchemeKind.SIGNATURE)
    if not provider.verify(cert.public_key, domain + state._digest() + body_unsigned, sig):
        raise state.fail(ALERT_BAD_SIGNATURE, BadTranscriptSignature("verify failed"))


def handshake_step(state: HandshakeState, frame_bytes: bytes,
                   clock: Callable[[], float] = time.time
                   ) -> Tuple[HandshakeState, Optional[bytes], Optional[SecurityAssociation]]:
    """Advance the handshake with one incoming frame.

    Returns (state, outgoing bytes or None, SecurityAssociation or None).
    On failure the typed error is raised after state.pending_alert is set to
    the ALERT frame the caller should transmit before closing.
    """
    if state.phase in (PHASE_FINISHED, PHASE_FAILED):
        raise state.fail(ALERT_PROTOCOL, ProtocolViolation(f"phase {state.phase} is terminal"))
    try:
        frame_type, body = decode_frame(frame_bytes)
    except ProtocolViolation as exc:
        raise state.fail(ALERT_PROTOCOL, exc)

    if frame_type == ALERT:
        state.phase = PHASE_FAILED
        code = body[0] if body else ALERT_INTERNAL
        raise ChannelAlert(code)

    if state.role == RESPONDER and state.phase == PHASE_START and frame_type == CLIENT_HELLO:
        return _respond_to_hello(state, frame_bytes, body, clock)
    if state.role == INITIATOR and state.phase == PHASE_HELLO_SENT and frame_type == SERVER_HELLO:
        return _finish_as_initiator(state, frame_bytes, body, clock)
    if state.role == RESPONDER and state.phase == PHASE_HELLO_RECEIVED and frame_type == CLIENT_FINISH:
        return _finish_as_responder(state, frame_bytes, body, clock)
    raise state.fail(
        ALERT_PROTOCOL,
        ProtocolViolation(f"unexpected frame type {frame_type} in phase {state.phase}"),
    )


def _respond_to_hello(state, frame_bytes, body, clock):
    reader = _BodyReader(body)
    try:
        version = reader.u8()
        peer_nonce = reader.take(NONCE_LEN)
        n_suites = reader.u8()
        offered = [CipherSuite.decode(reader.take(6)) for _ in range(n_suites)]
        cert_bytes = reader.u32_block()
        reader.finish()
    except ProtocolViolation as exc:
        raise state.fail(ALERT_PROTOCOL, exc)
    if version != PROTOCOL_VERSION:
        raise state.fail(ALERT_PROTOCOL, ProtocolViolation(f"protocol version {version}"))

    state.peer_cert = _verify_peer_cert(state, cert_bytes, clock())
    try:
        suite = negotiate_suite(offered, state.suites)
    except NoCommonSuite as exc:
        raise state.fail(ALERT_NO_COMMON_SUITE, exc)
    if state.peer_cert.scheme_id != suite.signature_scheme_id:
        raise state.fail(
            ALERT_BAD_CERTIFICATE,
            BadCertificate("peer key scheme does not match negotiated suite"),
        )
    state.chosen_suite = suite
    state.peer_nonce = peer_nonce
    state._absorb(frame_bytes)

    state.my_nonce = os.urandom(NONCE_LEN)
    kem = state.registry.get(suite.kem_scheme_id, SchemeKind.KEM)
    state.ephemeral_kem = kem.keygen()

    body_unsigned = state.my_nonce + suite.encode()
    body_unsigned += _u32_block(pki.cert_encode(state.my_cert))
    body_unsigned += _u32_block(state.ephemeral_kem.public_key)
    sigblob = _sign_transcript(state, _DOMAIN_RESPONDER, body_unsigned)
    out = encode_frame(SERVER_HELLO, body_unsigned + _u32_block(sigblob))
    state._absorb(out)
    state.phase = PHASE_HELLO_RECEIVED
    return state, out, None


def _finish_as_initiator(state, frame_bytes, body, clock):
    reader = _BodyReader(body)
    try:
        peer_nonce = reader.take(NONCE_LEN)
        suite = CipherSuite.decode(reader.take(6))
        cert_bytes = reader.u32_block()
        kem_pub = reader.u32_block()
        sigblob = reader.u32_block()
        reader.finish()
    except ProtocolViolation as exc:
        raise state.fail(ALERT_PROTOCOL, exc)
    body_unsigned = body[: len(body) - 4 - len(sigblob)]

    if suite not in state.suites:
        raise state.fail(
            ALERT_NO_COMMON_SUITE, NoCommonSuite("responder chose a suite we never offered")
        )
    state.peer_cert = _verify_peer_cert(state, cert_bytes, clock())
    if state.peer_cert.scheme_id != suite.signature_scheme_id:
        raise state.fail(
            ALERT_BAD_CERTIFICATE,
            BadCertificate("peer key scheme does not match negotiated suite"),
        )
    # transcript still holds only ClientHello here: that is what was signed
    _verify_transcript_sig(state, _DOMAIN_RESPONDER, body_unsigned, sigblob, suite)
    state.chosen_suite = suite
    state.peer_nonce = peer_nonce
    state._absorb(frame_bytes)

    kem = state.registry.get(suite.kem_scheme_id, SchemeKind.KEM)
    try:
        ciphertext, shared_secret = kem.encapsulate(kem_pub)
    except Exception as exc:
        raise state.fail(ALERT_DECAPSULATION, DecapsulationFailure(str(exc)))

    cf_unsigned = _u32_block(ciphertext)
    cf_sigblob = _sign_transcript(state, _DOMAIN_INITIATOR, cf_unsigned)
    out = encode_frame(CLIENT_FINISH, cf_unsigned + _u32_block(cf_sigblob))
    state._absorb(out)

    keys = derive_session_keys(shared_secret, state.my_nonce, state.peer_nonce)
    sa = SecurityAssociation(
        suite, keys, state.peer_cert.subject, True, clock(), state.registry
    )
    state.phase = PHASE_FINISHED
    return state, out, sa


def _finish_as_responder(state, frame_bytes, body, clock):
    reader = _BodyReader(body)
    try:
        ciphertext = reader.u32_block()
        sigblob = reader.u32_block()
        reader.finish()
    except ProtocolViolation as exc:
        raise state.fail(ALERT_PROTOCOL, exc)
    body_unsigned = body[: len(body) - 4 - len(sigblob)]

    # transcript holds ClientHello + ServerHello: what the initiator signed
    _verify_transcript_sig(state, _DOMAIN_INITIATOR, body_unsigned, sigblob,
                           state.chosen_suite)
    state._absorb(frame_bytes)

    kem = state.registry.get(state.chosen_suite.kem_scheme_id, SchemeKind.KEM)
    try:
        shared_secret = kem.decapsulate(state.ephemeral_kem, ciphertext)
    except Exception as exc:
        raise state.fail(ALERT_DECAPSULATION, DecapsulationFailure(str(exc)))

    keys = derive_session_keys(shared_secret, state.peer_nonce, state.my_nonce)
    sa = SecurityAssociation(
        state.chosen_suite, keys, state.peer_cert.subject, False, clock(),
        state.registry,
    )
    state.phase = PHASE_FINISHED
    return state, None, sa
