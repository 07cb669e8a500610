"""Measurement harness.

Three protocols: sign/verify time as a function of message size, delivered
message rate under a paced publisher, and connection setup time per cipher
suite. Plus a comparison of the compiled and pure-Python hash kernels.

Every benchmark is also a correctness test: a verify that returns False or
a message that fails to open aborts the run with AuditFailure, because
timings of broken crypto are meaningless. Grid shape is a pure function of
the requested config; timing outcomes only fill in the numbers.
"""

import math
import os
import socket
import statistics
import threading
import time
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence

from pqc2 import authz, channel, crypto, pki
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node
from pqc2.bus import Broker, BrokerConfig, protocol
from pqc2.crypto import default_registry
from pqc2.crypto.types import SchemeKind
from pqc2.errors import (
    AuditFailure,
    BadConfig,
    EmptyInput,
    HandshakeFailed,
    Pqc2Error,
    SetupFailure,
)
from pqc2.kernels import available_backends, get_backend

# grid defaults: sizes from the reference measurements, rates in Hz
SIGN_SIZES = (1_024, 10_240, 102_400, 1_048_576)
SIGN_SCHEMES = (1, 2)
MSG_SIZES = (706, 1_306, 6_106, 12_176, 60_502)
TARGET_RATES = (5, 50, 500)

_WARMUP = 3


@dataclass
class SignVerifyRecord:
    scheme: str
    size_bytes: int
    reps: int
    sign_mean_us: float
    sign_median_us: float
    sign_p95_us: float
    verify_mean_us: float
    verify_median_us: float
    verify_p95_us: float


@dataclass
class ThroughputRecord:
    mode: str
    size_bytes: int
    target_hz: float
    achieved_hz: float
    duration_s: float


@dataclass
class HandshakeRecord:
    suite: str
    reps: int
    mean_ms: float
    median_ms: float


@dataclass
class KernelRecord:
    backend: str
    op: str
    reps: int
    mean_us: float


def _p95(values: Sequence[float]) -> float:
    ordered = sorted(values)
    rank = max(0, math.ceil(0.95 * len(ordered)) - 1)
    return ordered[rank]


def _us(values: Sequence[float]):
    scaled = [v * 1e6 for v in values]
    return (statistics.fmean(scaled), statistics.median(scaled), _p95(scaled))


# ------------------------------------------------------------- sign/verify


def bench_sign_verify(schemes: Sequence[int] = SIGN_SCHEMES,
                      sizes: Sequence[int] = SIGN_SIZES,
                      reps: int = 30,
                      registry=default_registry) -> List[SignVerifyRecord]:
    if reps < 1:
        raise BadConfig("reps must be >= 1")
    if not schemes or not sizes:
        raise BadConfig("schemes and sizes must be non-empty")
    if any(s < 1 for s in sizes):
        raise BadConfig("message sizes must be >= 1 byte")
    for scheme_id in schemes:
        registry.get(scheme_id, SchemeKind.SIGNATURE)  # raises UnknownScheme

    records = []
    for scheme_id in schemes:
        name = registry.descriptor(scheme_id).name
        for size in sizes:
            kp = _signing_keypair(scheme_id, _WARMUP + reps, registry)
            for _ in range(_WARMUP):
                msg = os.urandom(size)
                sig = crypto.sign(kp, msg)
                if not crypto.verify(scheme_id, kp.public_key, msg, sig):
                    raise AuditFailure(f"{name} warm-up verify failed")
            msgs = [os.urandom(size) for _ in range(reps)]
            sign_times, sigs = [], []
            for msg in msgs:
                t0 = time.perf_counter()
                sig = crypto.sign(kp, msg)
                sign_times.append(time.perf_counter() - t0)
                sigs.append(sig)
            verify_times = []
            for msg, sig in zip(msgs, sigs):
                t0 = time.perf_counter()
                ok = crypto.verify(scheme_id, kp.public_key, msg, sig)
                verify_times.append(time.perf_counter() - t0)
                if not ok:
                    raise AuditFailure(f"{name}/{size}B verify returned False")
            sm, sd, sp = _us(sign_times)
            vm, vd, vp = _us(verify_times)
            records.append(SignVerifyRecord(
                scheme=name, size_bytes=size, reps=reps,
                sign_mean_us=sm, sign_median_us=sd, sign_p95_us=sp,
                verify_mean_us=vm, verify_median_us=vd, verify_p95_us=vp,
            ))
    return records


def _signing_keypair(scheme_id: int, signs_needed: int, registry):
    if scheme_id == 1:
        depth = max(2, (max(1, signs_needed) - 1).bit_length())
        return crypto.sig_keygen(scheme_id, depth=depth)
    return crypto.sig_keygen(scheme_id)


def crossover_notes(records: Sequence[SignVerifyRecord],
                    at_size: int = 102_400) -> List[str]:
    """Reported, never asserted: how the schemes compare at a chosen size."""
    by_scheme: Dict[str, SignVerifyRecord] = {
        r.scheme: r for r in records if r.size_bytes == at_size
    }
    if len(by_scheme) < 2:
        return []
    names = sorted(by_scheme)
    notes = []
    for metric in ("sign_mean_us", "verify_mean_us"):
        a, b = (getattr(by_scheme[n], metric) for n in names)
        ratio = a / b if b else float("inf")
        within = "within" if 0.5 <= ratio <= 2.0 else "outside"
        notes.append(
            f"{metric[:-8]} at {at_size} B: {names[0]} / {names[1]} = "
            f"{ratio:.2f}x ({within} 2x)"
        )
    return notes


# -------------------------------------------------------------- throughput


_BENCH_TOPIC = "/bench"
_BENCH_POLICY = """\
topics:
  /bench: {publish: [bench-pub], subscribe: [bench-sub]}
"""


def bench_throughput(modes: Sequence[str] = ("none",),
                     sizes: Sequence[int] = MSG_SIZES,
                     rates: Sequence[float] = TARGET_RATES,
                     duration: float = 10.0,
                     host: str = "127.0.0.1") -> List[ThroughputRecord]:
    """Paced publisher, counting at the subscriber.

    The pacer sends exactly floor(duration*rate) messages on an absolute
    schedule (send k at start + k/rate), so the achieved rate can undershoot
    on slow cells but can never overshoot the target.
    """
    if duration <= 0:
        raise BadConfig("duration must be positive")
    if not modes or not sizes or not rates:
        raise BadConfig("modes, sizes, and rates must be non-empty")
    if any(r <= 0 for r in rates):
        raise BadConfig("target rates must be positive")
    for mode in modes:
        protocol.check_mode(mode)

    records = []
    for mode in modes:
        binder = _BenchIdentities(mode)
        try:
            broker = Broker(_bench_broker_config(mode, host, binder)).start()
        except Pqc2Error as exc:
            raise SetupFailure(f"cannot stage throughput broker: {exc}")
        try:
            for size in sizes:
                for rate in rates:
                    records.append(_throughput_cell(
                        broker, mode, binder, size, rate, duration, host))
        finally:
            broker.stop()
    return records


class _BenchIdentities:
    """One CA per mode; endpoint keys are re-issued per cell because scheme-1
    one-time leaves are consumable and cells must not starve each other."""

    def __init__(self, mode: str):
        self.mode = mode
        self.broker = Identity(subject="bench-broker")
        self._ca = None
        self._trust = None
        if mode != "none":
            self._ca, ca_cert = pki.create_ca("bench-ca", 1, depth=6)
            self._trust = pki.TrustStore([ca_cert])
            kp = crypto.sig_keygen(1, depth=8)  # one transcript sign per conn
            self.broker = Identity(
                subject="bench-broker", keypair=kp,
                certificate=self._issue("bench-broker", kp), trust_store=self._trust,
            )

    def _issue(self, name, kp):
        now = int(time.time())
        return pki.issue_certificate(
            self._ca, name, pki.Role.OTHER, 1, kp.public_key,
            (now - 300, now + 6 * 3600))

    def endpoints(self, signs_needed: int):
        if self.mode == "none":
            return {name: Identity(subject=name)
                    for name in ("bench-pub", "bench-sub")}
        depth = min(16, max(4, (signs_needed + 2 - 1).bit_length()))
        out = {}
        certs = {}
        for name in ("bench-pub", "bench-sub"):
            kp = crypto.sig_keygen(1, depth=depth if name == "bench-pub" else 4)
            certs[name] = self._issue(name, kp)
            out[name] = Identity(subject=name, keypair=kp,
                                 certificate=certs[name], trust_store=self._trust)
        directory = dict(certs)
        directory["bench-broker"] = self.broker.certificate
        for ident in out.values():
            ident.peer_certs.update(directory)
        return out


def _bench_broker_config(mode: str, host: str, binder) -> BrokerConfig:
    cfg = dict(policy=authz.policy_load(_BENCH_POLICY), host=host, mode=mode)
    if protocol.mode_uses_channel(mode):
        cfg.update(trust_store=binder.broker.trust_store,
                   certificate=binder.broker.certificate,
                   keypair=binder.broker.keypair)
    return BrokerConfig(**cfg)


def _throughput_cell(broker, mode, binder, size, rate, duration, host):
    idents = binder.endpoints(int(duration * rate))
    try:
        sub = connect_node(idents["bench-sub"], host, broker.port, mode,
                           subscribes=[_BENCH_TOPIC])
        pub = connect_node(idents["bench-pub"], host, broker.port, mode,
                           publishes=[_BENCH_TOPIC])
    except Pqc2Error as exc:
        raise SetupFailure(f"cannot stage throughput cell: {exc}")

    outbound = Outbound(idents["bench-pub"], mode)
    guard = InboundGuard(idents["bench-sub"], mode)
    payload = os.urandom(size)
    total = int(duration * rate)
    got = {"n": 0}
    done = threading.Event()

    def consume():
        # after the publisher finishes, allow a short in-flight drain window;
        # give up only after sustained silence so nothing polled is ever lost
        last_seen = time.perf_counter()
        while got["n"] < total:
            wire = sub.poll(_BENCH_TOPIC)
            if wire is None:
                if done.is_set() and time.perf_counter() - last_seen > 2.0:
                    return
                time.sleep(0.0005)
                continue
            last_seen = time.perf_counter()
            env = guard.open(wire, _BENCH_TOPIC)
            if protocol.mode_signs_envelopes(mode) and env is None:
                raise AuditFailure("subscriber rejected a benchmark envelope")
            got["n"] += 1

    consumer = threading.Thread(target=consume, daemon=True)
    consumer.start()
    start = time.perf_counter()
    for k in range(total):
        t_next = start + k / rate
        delay = t_next - time.perf_counter()
        if delay > 0:
            time.sleep(delay)
        pub.publish(_BENCH_TOPIC, outbound.seal(_BENCH_TOPIC, payload))
    elapsed = max(time.perf_counter() - start, duration)
    done.set()
    consumer.join(timeout=max(5.0, duration))
    pub.close()
    sub.close()
    return ThroughputRecord(
        mode=mode, size_bytes=size, target_hz=float(rate),
        achieved_hz=got["n"] / elapsed, duration_s=round(elapsed, 3),
    )


# --------------------------------------------------------------- handshake


def bench_handshake(suites: Optional[Sequence[channel.CipherSuite]] = None,
                    reps: int = 20,
                    host: str = "127.0.0.1",
                    registry=default_registry) -> List[HandshakeRecord]:
    if reps < 1:
        raise BadConfig("reps must be >= 1")
    if suites is None:
        suites = list(channel.DEFAULT_SUITES)
    if not suites:
        raise BadConfig("need at least one suite")

    records = []
    for suite in suites:
        records.append(_handshake_cell(suite, reps, host, registry))
    return records


def _handshake_cell(suite, reps, host, registry) -> HandshakeRecord:
    name = suite.describe(registry)
    sig_id = suite.signature_scheme_id
    now = int(time.time())
    kwargs = {"depth": max(4, (reps + _WARMUP).bit_length())} if sig_id == 1 else {}
    ca, ca_cert = pki.create_ca("hs-ca", 1, depth=6)
    trust = pki.TrustStore([ca_cert])
    ends = {}
    for end in ("hs-client", "hs-server"):
        kp = crypto.sig_keygen(sig_id, **kwargs)
        cert = pki.issue_certificate(
            ca, end, pki.Role.OTHER, sig_id, kp.public_key, (now - 300, now + 3600))
        ends[end] = (cert, kp)
    cfg = channel.ChannelConfig(suites=[suite])

    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    listener.bind((host, 0))
    listener.listen(8)
    port = listener.getsockname()[1]
    failures: List[str] = []

    def serve_one():
        try:
            conn, _ = listener.accept()
        except OSError:
            return
        try:
            state = channel.handshake_respond(cfg, *ends["hs-server"], trust)
            while True:
                ftype, body, raw = channel.read_frame(
                    lambda n, c=conn: _read_exact(c, n))
                state, out, sa = channel.handshake_step(state, raw)
                if out is not None:
                    conn.sendall(out)
                if sa is not None:
                    return
        except (Pqc2Error, OSError) as exc:
            failures.append(f"server: {exc}")
        finally:
            conn.close()

    times = []
    try:
        for i in range(reps + _WARMUP):
            t = threading.Thread(target=serve_one, daemon=True)
            t.start()
            t0 = time.perf_counter()
            try:
                sock = socket.create_connection((host, port), timeout=10)
                state, frame = channel.handshake_initiate(cfg, *ends["hs-client"], trust)
                sock.sendall(frame)
                sa = None
                while sa is None:
                    ftype, body, raw = channel.read_frame(
                        lambda n, s=sock: _read_exact(s, n))
                    state, out, sa = channel.handshake_step(state, raw)
                    if out is not None:
                        sock.sendall(out)
                elapsed = time.perf_counter() - t0
                sock.close()
            except (Pqc2Error, OSError) as exc:
                raise HandshakeFailed(
                    f"suite {name} rep {i}: {exc}" +
                    (f" ({failures[-1]})" if failures else ""))
            t.join(timeout=10)
            if i >= _WARMUP:
                times.append(elapsed)
    finally:
        listener.close()
    ms = [t * 1e3 for t in times]
    return HandshakeRecord(suite=name, reps=reps,
                           mean_ms=statistics.fmean(ms),
                           median_ms=statistics.median(ms))


def _read_exact(sock, n):
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed during handshake")
        buf += chunk
    return bytes(buf)


# ------------------------------------------------------------------ kernels


def bench_kernels(reps: int = 5, leaves: int = 256) -> List[KernelRecord]:
    """Same hash workloads on every importable backend; the relative numbers
    justify (or indict) shipping the compiled extension."""
    if reps < 1:
        raise BadConfig("reps must be >= 1")
    seed = b"\x5b" * 32
    records = []
    for name in available_backends():
        backend = get_backend(name)
        nodes = backend.ots_leaf_hashes(seed, 0, leaves)

        def tree_reduce(b=backend, nodes=nodes):
            level = nodes
            while len(level) > 32:  # concatenated 32-byte nodes down to a root
                level = b.hash_tree_level(level)
            return level

        for op, fn in [
            ("ots_leaf_hashes", lambda b=backend: b.ots_leaf_hashes(seed, 0, leaves)),
            ("hash_tree_level", tree_reduce),
        ]:
            fn()  # warm-up
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                fn()
                times.append(time.perf_counter() - t0)
            records.append(KernelRecord(
                backend=name, op=op, reps=reps,
                mean_us=statistics.fmean(times) * 1e6))
    return records


# ---------------------------------------------------------------- artifacts


_HEADERS = {
    SignVerifyRecord: ("scheme,size_bytes,reps,sign_mean_us,sign_median_us,"
                       "sign_p95_us,verify_mean_us,verify_median_us,verify_p95_us"),
    ThroughputRecord: "mode,size_bytes,target_hz,achieved_hz,duration_s",
    HandshakeRecord: "suite,reps,mean_ms,median_ms",
    KernelRecord: "backend,op,reps,mean_us",
}


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(records: Sequence, path: str) -> None:
    if not records:
        raise EmptyInput("no records to write")
    kind = type(records[0])
    header = _HEADERS.get(kind)
    if header is None:
        raise BadConfig(f"unknown record type {kind.__name__}")
    names = [f.name for f in fields(kind)]
    assert ",".join(names) == header  # dataclass order IS the CSV contract
    lines = [header]
    for rec in records:
        if type(rec) is not kind:
            raise BadConfig("mixed record types in one CSV")
        lines.append(",".join(_cell(getattr(rec, n)) for n in names))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot(records: Sequence, path: str) -> None:
    """Self-contained SVG. Sign/verify and throughput charts use a log-scaled
    x axis (message size); handshake and kernel records render as bars."""
    if not records:
        raise EmptyInput("no records to plot")
    kind = type(records[0])
    if kind is SignVerifyRecord:
        series = {}
        for r in records:
            series.setdefault(f"{r.scheme} sign", []).append((r.size_bytes, r.sign_mean_us))
            series.setdefault(f"{r.scheme} verify", []).append((r.size_bytes, r.verify_mean_us))
        svg = _line_chart(series, "message size (bytes, log)", "mean time (us)")
    elif kind is ThroughputRecord:
        series = {}
        for r in records:
            key = f"{r.mode} @ {r.target_hz:g} Hz"
            series.setdefault(key, []).append((r.size_bytes, r.achieved_hz))
        svg = _line_chart(series, "message size (bytes, log)", "achieved Hz")
    elif kind is HandshakeRecord:
        svg = _bar_chart([(r.suite, r.mean_ms) for r in records], "mean ms")
    elif kind is KernelRecord:
        svg = _bar_chart(
            [(f"{r.backend}:{r.op}", r.mean_us) for r in records], "mean us")
    else:
        raise BadConfig(f"unknown record type {kind.__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


_W, _H, _PAD = 640, 400, 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf")


def _line_chart(series: Dict[str, list], x_label: str, y_label: str) -> str:
    pts_all = [p for pts in series.values() for p in pts]
    xs = [math.log10(x) for x, _ in pts_all]
    ys = [y for _, y in pts_all]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = 0.0, max(ys) or 1.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return _PAD + (math.log10(x) - x_lo) / (x_hi - x_lo) * (_W - 2 * _PAD)

    def sy(y):
        return _H - _PAD - (y - y_lo) / (y_hi - y_lo) * (_H - 2 * _PAD)

    parts = [_svg_open(), _axes(x_label, y_label)]
    for i, (name, pts) in enumerate(sorted(series.items())):
        color = _COLORS[i % len(_COLORS)]
        pts = sorted(pts)
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="2" '
            f'points="{coords}"/>'
        )
        for x, y in pts:
            parts.append(
                f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{_W - _PAD + 4}" y="{_PAD + 16 * i}" font-size="11" '
            f'fill="{color}">{_esc(name)}</text>'
        )
    for x, _ in pts_all:
        parts.append(
            f'<text x="{sx(x):.1f}" y="{_H - _PAD + 16}" font-size="10" '
            f'text-anchor="middle">{x}</text>'
        )
    parts.append(f'<text x="{_PAD - 8}" y="{sy(y_hi):.1f}" font-size="10" '
                 f'text-anchor="end">{y_hi:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _bar_chart(items, y_label: str) -> str:
    y_hi = max(v for _, v in items) or 1.0
    n = len(items)
    slot = (_W - 2 * _PAD) / n
    parts = [_svg_open(), _axes("", y_label)]
    for i, (name, value) in enumerate(items):
        x = _PAD + i * slot + slot * 0.15
        h = (value / y_hi) * (_H - 2 * _PAD)
        y = _H - _PAD - h
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{slot * 0.7:.1f}" '
                     f'height="{h:.1f}" fill="{color}"/>')
        parts.append(f'<text x="{x + slot * 0.35:.1f}" y="{_H - _PAD + 14}" '
                     f'font-size="10" text-anchor="middle">{_esc(name)}</text>')
        parts.append(f'<text x="{x + slot * 0.35:.1f}" y="{y - 4:.1f}" '
                     f'font-size="10" text-anchor="middle">{value:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _svg_open() -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W + 160}" '
            f'height="{_H}" viewBox="0 0 {_W + 160} {_H}" '
            f'font-family="sans-serif">')


def _axes(x_label: str, y_label: str) -> str:
    return (
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" '
        f'stroke="#333"/>'
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="#333"/>'
        f'<text x="{_W / 2}" y="{_H - 12}" font-size="12" '
        f'text-anchor="middle">{_esc(x_label)}</text>'
        f'<text x="16" y="{_H / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2})">{_esc(y_label)}</text>'
    )


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
