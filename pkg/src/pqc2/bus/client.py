"""Node-side session: connect, handshake (secure modes), register, then
publish and receive envelopes.

A session owns one socket and one background reader thread. Deliveries land
in per-topic FIFO queues in arrival order. Publishing is synchronous. The
raw_send/raw_frame escape hatches exist for attack tooling: they skip the
client-side checks a well-behaved node performs.
"""

import queue
import socket
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Union

from pqc2 import authz, channel, envelope, pki
from pqc2.bus import protocol
from pqc2.crypto import default_registry
from pqc2.crypto.types import SignatureKeyPair
from pqc2.errors import (
    ChannelAlert,
    ConfigError,
    ConnectionLost,
    FrameRejected,
    NotAuthorized,
    NotDeclared,
    ProtocolViolation,
)

_CLOSED = object()  # queue sentinel pushed when the link dies


@dataclass
class NodeConfig:
    subject: str
    host: str
    port: int
    mode: str = protocol.MODE_NONE
    publishes: Sequence[str] = ()
    subscribes: Sequence[str] = ()
    certificate: Optional[pki.Certificate] = None
    keypair: Optional[SignatureKeyPair] = None
    trust_store: Optional[pki.TrustStore] = None
    channel_config: Optional[channel.ChannelConfig] = None
    connect_timeout: float = 10.0
    registry: object = field(default=default_registry, repr=False)

    def __post_init__(self):
        protocol.check_mode(self.mode)
        if protocol.mode_uses_channel(self.mode):
            missing = [
                name
                for name, val in (
                    ("certificate", self.certificate),
                    ("keypair", self.keypair),
                    ("trust_store", self.trust_store),
                )
                if val is None
            ]
            if missing:
                raise ConfigError(
                    f"mode {self.mode!r} needs a secure channel; missing {missing}"
                )
            if self.channel_config is None:
                self.channel_config = channel.ChannelConfig()


class Session:
    def __init__(self, config: NodeConfig, sock: socket.socket,
                 sa: Optional[channel.SecurityAssociation]):
        self.config = config
        self.subject = config.subject
        self._sock = sock
        self._sa = sa
        self._send_lock = threading.Lock()
        self._queues: Dict[str, "queue.Queue"] = {
            authz.normalize_topic(t): queue.Queue() for t in config.subscribes
        }
        self._declared_pub = {authz.normalize_topic(t) for t in config.publishes}
        self._alive = True
        self._reader: Optional[threading.Thread] = None
        self.last_frame: Optional[bytes] = None  # attack tooling: replay fodder

    # wire primitives

    def _read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self._sock.recv(n - len(buf))
            except OSError as exc:
                raise ConnectionLost(str(exc))
            if not chunk:
                raise ConnectionLost("broker closed the connection")
            buf += chunk
        return bytes(buf)

    def _read_message(self) -> Optional[bytes]:
        """One application message; None for a dropped (replayed) frame."""
        ftype, body, _raw = channel.read_frame(self._read_exact)
        if self._sa is not None:
            try:
                return self._sa.open_body(ftype, body)
            except FrameRejected as exc:
                if exc.reason == "Replay":
                    return None
                raise ConnectionLost(f"undecryptable frame: {exc}")
        if ftype != channel.DATA:
            raise ConnectionLost(f"unexpected frame type {ftype} from broker")
        return body

    def _send_message(self, msg: bytes) -> None:
        with self._send_lock:
            if not self._alive:
                raise ConnectionLost("session is closed")
            if self._sa is not None:
                frame = self._sa.seal_frame(msg)
            else:
                frame = channel.encode_frame(channel.DATA, msg)
            self.last_frame = frame
            try:
                self._sock.sendall(frame)
            except OSError as exc:
                raise ConnectionLost(str(exc))

    # public API

    def publish(self, topic: str, env: Union[bytes, envelope.Envelope]) -> None:
        topic = authz.normalize_topic(topic)
        if topic not in self._declared_pub:
            raise NotDeclared(topic)
        data = envelope.encode_wire(env) if isinstance(env, envelope.Envelope) else env
        self._send_message(protocol.encode_publish(topic, data))

    def next_envelope(self, topic: str, timeout: Optional[float] = None) -> bytes:
        """Block for the next envelope on a subscribed topic (wire bytes)."""
        topic = authz.normalize_topic(topic)
        q = self._queues.get(topic)
        if q is None:
            raise NotDeclared(topic)
        try:
            item = q.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError(f"no envelope on {topic} within {timeout}s")
        if item is _CLOSED:
            q.put(_CLOSED)  # keep the sentinel for other waiters
            raise ConnectionLost("session closed while waiting for delivery")
        return item

    def poll(self, topic: str) -> Optional[bytes]:
        """Non-blocking next_envelope; None when the queue is empty."""
        topic = authz.normalize_topic(topic)
        q = self._queues.get(topic)
        if q is None:
            raise NotDeclared(topic)
        try:
            item = q.get_nowait()
        except queue.Empty:
            return None
        if item is _CLOSED:
            q.put(_CLOSED)
            raise ConnectionLost("session closed")
        return item

    def pending(self, topic: str) -> int:
        q = self._queues.get(authz.normalize_topic(topic))
        return q.qsize() if q is not None else 0

    def raw_send(self, msg: bytes) -> None:
        """Send an arbitrary message (skips declaration checks). Attack tooling."""
        self._send_message(msg)

    def raw_frame(self, frame: bytes) -> None:
        """Push raw bytes onto the socket, bypassing even the channel layer."""
        with self._send_lock:
            try:
                self._sock.sendall(frame)
            except OSError as exc:
                raise ConnectionLost(str(exc))

    @property
    def peer_subject(self) -> Optional[str]:
        return self._sa.peer_subject if self._sa is not None else None

    @property
    def is_open(self) -> bool:
        return self._alive

    def close(self) -> None:
        self._alive = False
        # shutdown, not just close: close() alone leaves a reader blocked in
        # recv holding the file description open, so no FIN is ever sent and
        # the join below times out.
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass
        if self._reader is not None and self._reader is not threading.current_thread():
            self._reader.join(timeout=5)

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # background delivery

    def _start_reader(self) -> None:
        self._reader = threading.Thread(
            target=self._reader_loop, name=f"session-{self.subject}", daemon=True
        )
        self._reader.start()

    def _reader_loop(self) -> None:
        try:
            while self._alive:
                msg = self._read_message()
                if msg is None:
                    continue
                try:
                    msg_type, payload = protocol.parse_message(msg)
                except ProtocolViolation:
                    continue
                if msg_type != protocol.MSG_DELIVER:
                    continue
                topic, env = payload
                # deliveries for topics subscribed later still get a queue
                q = self._queues.setdefault(authz.normalize_topic(topic), queue.Queue())
                q.put(env)
        except (ConnectionLost, ChannelAlert, OSError):
            pass
        finally:
            self._alive = False
            for q in self._queues.values():
                q.put(_CLOSED)


def _handshake_as_initiator(config: NodeConfig, sock: socket.socket,
                            read_exact) -> channel.SecurityAssociation:
    state, first = channel.handshake_initiate(
        config.channel_config, config.certificate, config.keypair,
        config.trust_store, config.registry,
    )
    sock.sendall(first)
    while True:
        _ftype, _body, raw = channel.read_frame(read_exact)
        try:
            state, out, sa = channel.handshake_step(state, raw)
        except Exception:
            if state.pending_alert is not None:
                try:
                    sock.sendall(state.pending_alert)
                except OSError:
                    pass
            raise
        if out is not None:
            sock.sendall(out)
        if sa is not None:
            return sa


def node_connect(config: NodeConfig) -> Session:
    """Dial the broker, complete the handshake when required, register, and
    return a live Session. Raises NotAuthorized when any declared topic fails
    the broker's policy check."""
    try:
        sock = socket.create_connection(
            (config.host, config.port), timeout=config.connect_timeout
        )
    except OSError as exc:
        raise ConnectionLost(f"cannot reach broker at {config.host}:{config.port}: {exc}")
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    session = Session(config, sock, sa=None)
    try:
        if protocol.mode_uses_channel(config.mode):
            session._sa = _handshake_as_initiator(config, sock, session._read_exact)
        session._send_message(
            protocol.encode_register(config.subject, list(config.publishes),
                                     list(config.subscribes))
        )
        while True:
            msg = session._read_message()
            if msg is not None:
                break
        msg_type, doc = protocol.parse_message(msg)
        if msg_type != protocol.MSG_REGISTER_RESULT:
            raise ProtocolViolation("expected a registration result")
        if not doc["ok"]:
            raise NotAuthorized(doc.get("denied") or [doc.get("error", "refused")])
    except BaseException:
        sock.close()
        raise
    sock.settimeout(None)
    session._start_reader()
    return session
