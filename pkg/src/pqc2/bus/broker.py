"""Threaded broker: accepts connections, authenticates (secure modes),
authorizes, and routes envelopes between registered nodes.

Topology is a star. Each connection gets one reader thread and, once
registered, one writer thread draining a bounded queue (drop-newest on
overflow, with a SecurityEvent). Per-connection failures never take the
broker down; the accept loop runs until stop().
"""

import logging
import queue
import socket
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from pqc2 import authz, channel, pki
from pqc2.bus import protocol
from pqc2.bus.capture import DIR_INBOUND, DIR_OUTBOUND, CaptureWriter
from pqc2.bus.events import EventKind, EventLog
from pqc2.crypto import default_registry
from pqc2.crypto.types import SignatureKeyPair
from pqc2.errors import (
    BindFailure,
    ChannelAlert,
    ConfigError,
    ConnectionLost,
    FrameRejected,
    ProtocolViolation,
)

log = logging.getLogger("pqc2.broker")


@dataclass
class BrokerConfig:
    policy: authz.AuthzPolicy
    host: str = "127.0.0.1"
    port: int = 0
    mode: str = protocol.MODE_NONE
    trust_store: Optional[pki.TrustStore] = None
    certificate: Optional[pki.Certificate] = None
    keypair: Optional[SignatureKeyPair] = None
    channel_config: Optional[channel.ChannelConfig] = None
    capture_path: Optional[str] = None
    event_log_path: Optional[str] = None
    max_queue: int = 1024
    registry: object = field(default=default_registry, repr=False)

    def __post_init__(self):
        protocol.check_mode(self.mode)
        if protocol.mode_uses_channel(self.mode):
            missing = [
                name
                for name, val in (
                    ("trust_store", self.trust_store),
                    ("certificate", self.certificate),
                    ("keypair", self.keypair),
                )
                if val is None
            ]
            if missing:
                raise ConfigError(
                    f"mode {self.mode!r} needs a secure channel; missing {missing}"
                )
            if self.channel_config is None:
                self.channel_config = channel.ChannelConfig()


class _Conn:
    def __init__(self, sock: socket.socket, addr: str, max_queue: int):
        self.sock = sock
        self.addr = addr
        self.sa: Optional[channel.SecurityAssociation] = None
        self.subject: Optional[str] = None
        self.declared_pub: Set[str] = set()
        self.declared_sub: Set[str] = set()
        self.sendq: "queue.Queue[Optional[bytes]]" = queue.Queue(maxsize=max_queue)
        self.send_lock = threading.Lock()
        self.alive = True


class Broker:
    def __init__(self, config: BrokerConfig):
        self.config = config
        self.event_log = EventLog(config.event_log_path)
        self._capture: Optional[CaptureWriter] = None
        self._listener: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._conns: Set[_Conn] = set()
        self._subs: Dict[str, Set[_Conn]] = {}
        self._lock = threading.Lock()
        self._closing = False

    # lifecycle

    def start(self) -> "Broker":
        try:
            sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            sock.bind((self.config.host, self.config.port))
            sock.listen(64)
        except OSError as exc:
            raise BindFailure(f"cannot listen on {self.config.host}:{self.config.port}: {exc}")
        self._listener = sock
        if self.config.capture_path:
            self._capture = CaptureWriter(self.config.capture_path)
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="broker-accept", daemon=True
        )
        self._accept_thread.start()
        log.info("broker listening on %s:%d (mode %s)", *sock.getsockname(), self.config.mode)
        return self

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    @property
    def address(self) -> str:
        host, port = self._listener.getsockname()
        return f"{host}:{port}"

    def stop(self) -> None:
        self._closing = True
        if self._listener is not None:
            # shutdown wakes the accept() blocked in the accept thread;
            # close() alone would leave it parked until the join timeout.
            try:
                self._listener.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            conns = list(self._conns)
        for conn in conns:
            self._drop_conn(conn)
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)
        if self._capture is not None:
            self._capture.close()
        self.event_log.close()

    def __enter__(self) -> "Broker":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # wire helpers

    def _tap(self, direction: int, addr: str, data: bytes) -> None:
        if self._capture is not None:
            self._capture.record(direction, addr, data)

    def _send_raw(self, conn: _Conn, frame: bytes) -> None:
        with conn.send_lock:
            conn.sock.sendall(frame)
        self._tap(DIR_OUTBOUND, conn.addr, frame)

    def _read_frame(self, conn: _Conn):
        def read_exact(n: int) -> bytes:
            buf = bytearray()
            while len(buf) < n:
                chunk = conn.sock.recv(n - len(buf))
                if not chunk:
                    raise ConnectionLost("peer closed the stream")
                buf += chunk
            return bytes(buf)

        ftype, body, raw = channel.read_frame(read_exact)
        self._tap(DIR_INBOUND, conn.addr, raw)
        return ftype, body, raw

    def _drop_conn(self, conn: _Conn) -> None:
        with self._lock:
            conn.alive = False
            self._conns.discard(conn)
            for subs in self._subs.values():
                subs.discard(conn)
        try:
            conn.sendq.put_nowait(None)  # writer sentinel
        except queue.Full:
            pass
        try:
            conn.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            conn.sock.close()
        except OSError:
            pass

    # connection handling

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            conn = _Conn(sock, f"{addr[0]}:{addr[1]}", self.config.max_queue)
            with self._lock:
                self._conns.add(conn)
            threading.Thread(
                target=self._serve, args=(conn,), name=f"broker-{conn.addr}", daemon=True
            ).start()

    def _serve(self, conn: _Conn) -> None:
        try:
            if protocol.mode_uses_channel(self.config.mode):
                if not self._handshake(conn):
                    return
            if not self._register(conn):
                return
            threading.Thread(
                target=self._writer_loop, args=(conn,),
                name=f"broker-w-{conn.addr}", daemon=True,
            ).start()
            self._pump(conn)
        except (ConnectionLost, OSError):
            pass
        except (ProtocolViolation, ChannelAlert) as exc:
            log.debug("closing %s: %s", conn.addr, exc)
        except Exception:
            log.exception("connection %s crashed", conn.addr)
        finally:
            self._drop_conn(conn)

    def _handshake(self, conn: _Conn) -> bool:
        cfg = self.config
        state = channel.handshake_respond(
            cfg.channel_config, cfg.certificate, cfg.keypair, cfg.trust_store, cfg.registry
        )
        first = True
        while True:
            ftype, body, raw = self._read_frame(conn)
            if first and ftype != channel.CLIENT_HELLO and cfg.channel_config.trap_all:
                self.event_log.append(
                    EventKind.PLAINTEXT_REJECTED, subject=conn.addr,
                    detail=f"first frame type {ftype} is not a handshake",
                )
                return False
            first = False
            try:
                state, out, sa = channel.handshake_step(state, raw)
            except Exception as exc:
                if state.pending_alert is not None:
                    try:
                        self._send_raw(conn, state.pending_alert)
                    except OSError:
                        pass
                self.event_log.append(
                    EventKind.HANDSHAKE_FAILED, subject=conn.addr, detail=str(exc)
                )
                return False
            if out is not None:
                self._send_raw(conn, out)
            if sa is not None:
                conn.sa = sa
                return True

    def _recv_message(self, conn: _Conn) -> Optional[bytes]:
        """Next application message, or None for a recoverable drop."""
        ftype, body, raw = self._read_frame(conn)
        if conn.sa is not None:
            try:
                return conn.sa.open_body(ftype, body)
            except FrameRejected as exc:
                kind = EventKind.REPLAY if exc.reason == "Replay" else EventKind.BAD_SIGNATURE
                self.event_log.append(kind, subject=conn.subject or conn.addr, detail=str(exc))
                if exc.reason == "Replay":
                    return None  # drop the duplicate, keep the stream
                raise ConnectionLost("undecryptable frame")  # stream integrity gone
        if ftype != channel.DATA:
            raise ProtocolViolation(f"unexpected frame type {ftype} on plaintext link")
        return body

    def _register(self, conn: _Conn) -> bool:
        while True:
            try:
                msg = self._recv_message(conn)
            except ChannelAlert:
                return False
            if msg is not None:
                break
        try:
            msg_type, doc = protocol.parse_message(msg)
        except ProtocolViolation as exc:
            self._send_result(conn, False, error=str(exc))
            return False
        if msg_type != protocol.MSG_REGISTER:
            self._send_result(conn, False, error="expected registration first")
            return False
        subject = doc["subject"]
        if conn.sa is not None and subject != conn.sa.peer_subject:
            self.event_log.append(
                EventKind.AUTHZ_DENIED, subject=subject,
                detail=f"claimed subject does not match certificate "
                       f"({conn.sa.peer_subject!r})",
            )
            self._send_result(conn, False, error="subject does not match certificate")
            return False
        publishes = [authz.normalize_topic(t) for t in doc["publish"]]
        subscribes = [authz.normalize_topic(t) for t in doc["subscribe"]]
        denied: List[str] = []
        for topic in publishes:
            if not authz.check(self.config.policy, subject, topic, authz.Action.PUBLISH):
                denied.append(f"{topic}:publish")
        for topic in subscribes:
            if not authz.check(self.config.policy, subject, topic, authz.Action.SUBSCRIBE):
                denied.append(f"{topic}:subscribe")
        if denied:
            for item in denied:
                topic, action = item.rsplit(":", 1)
                self.event_log.append(
                    EventKind.AUTHZ_DENIED, subject=subject, topic=topic,
                    detail=f"registration declared {action}",
                )
            self._send_result(conn, False, denied=denied)
            return False
        conn.subject = subject
        conn.declared_pub = set(publishes)
        conn.declared_sub = set(subscribes)
        with self._lock:
            for topic in conn.declared_sub:
                self._subs.setdefault(topic, set()).add(conn)
        self._send_result(conn, True)
        log.info("registered %s from %s (pub=%s sub=%s)",
                 subject, conn.addr, sorted(conn.declared_pub), sorted(conn.declared_sub))
        return True

    def _send_result(self, conn: _Conn, ok: bool, denied=(), error: str = "") -> None:
        msg = protocol.encode_register_result(ok, denied, error)
        try:
            self._send_message(conn, msg)
        except OSError:
            pass

    def _send_message(self, conn: _Conn, msg: bytes) -> None:
        if conn.sa is not None:
            with conn.send_lock:
                frame = conn.sa.seal_frame(msg)
                conn.sock.sendall(frame)
            self._tap(DIR_OUTBOUND, conn.addr, frame)
        else:
            self._send_raw(conn, channel.encode_frame(channel.DATA, msg))

    def _pump(self, conn: _Conn) -> None:
        while conn.alive and not self._closing:
            try:
                msg = self._recv_message(conn)
            except ChannelAlert:
                return
            if msg is None:
                continue
            try:
                msg_type, payload = protocol.parse_message(msg)
            except ProtocolViolation as exc:
                # message-level garbage: frame boundaries are intact, so the
                # stream stays usable; discard and carry on (flood tolerance)
                log.debug("garbage message from %s: %s", conn.subject or conn.addr, exc)
                continue
            if msg_type == protocol.MSG_PUBLISH:
                topic, env = payload
                self._handle_publish(conn, authz.normalize_topic(topic), env)
            else:
                raise ProtocolViolation(f"unexpected message type {msg_type} after registration")

    def _handle_publish(self, conn: _Conn, topic: str, env: bytes) -> None:
        if topic not in conn.declared_pub:
            self.event_log.append(
                EventKind.AUTHZ_DENIED, subject=conn.subject, topic=topic,
                detail="publish to a topic not declared at registration",
            )
            return
        decision = authz.check(self.config.policy, conn.subject, topic, authz.Action.PUBLISH)
        if not decision.allow:
            self.event_log.append(
                EventKind.AUTHZ_DENIED, subject=conn.subject, topic=topic,
                detail=decision.reason,
            )
            return
        deliver = protocol.encode_deliver(topic, env)
        with self._lock:
            targets = [c for c in self._subs.get(topic, ()) if c.alive]
        for target in targets:
            try:
                target.sendq.put_nowait(deliver)
            except queue.Full:
                self.event_log.append(
                    EventKind.QUEUE_OVERFLOW, subject=target.subject or target.addr,
                    topic=topic, detail="delivery queue full; frame dropped",
                )

    def _writer_loop(self, conn: _Conn) -> None:
        while True:
            msg = conn.sendq.get()
            if msg is None:
                return
            try:
                self._send_message(conn, msg)
            except OSError:
                self._drop_conn(conn)
                return
