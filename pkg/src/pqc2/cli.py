"""Command line entry point.

Exit codes: 0 success, 1 configuration problem (including bad flags),
2 runtime failure, 3 scenario expectation failure. Every file referenced by
flags is loaded and validated before anything binds a port or writes output.
"""

import argparse
import json
import os
import shutil
import sys
import time
from typing import List, Optional

from pqc2 import authz, bench, channel, config, pki
from pqc2.agents import (
    AttackContext,
    GroundConfig,
    GroundStation,
    MobileAgent,
    MobileConfig,
    Monitor,
    MonitorConfig,
    RelayAgent,
    RelayConfig,
    bundled_scenario_names,
    load_bundled_scenario,
    run_attack,
    scenario_load_file,
    scenario_run,
)
from pqc2.agents.scenario import IDENTITY_ROLES
from pqc2.bus import Broker, BrokerConfig, capture_load, capture_scan
from pqc2.crypto import default_registry, keyfiles
from pqc2.crypto.types import SchemeKind
from pqc2.errors import ConfigError, Pqc2Error

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_EXPECTATION = 3


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags; remap to 1
        code = exc.code if exc.code is not None else 0
        return EXIT_OK if code == 0 else EXIT_CONFIG
    try:
        config.configure_logging(getattr(args, "log_level", None))
    except ConfigError as exc:
        _complain(exc)
        return EXIT_CONFIG
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        _complain(exc)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return EXIT_OK
    except (Pqc2Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _complain(exc: Exception) -> None:
    for cause in str(exc).split("; "):
        print(f"config error: {cause}", file=sys.stderr)


# ------------------------------------------------------------------ parser


def _build_parser() -> argparse.ArgumentParser:
    sig_names = [d.name for d in default_registry.signature_schemes()]
    parser = argparse.ArgumentParser(
        prog="pqc2",
        description="Secure publish/subscribe command-and-control demo kit.",
    )
    parser.add_argument("--log-level", choices=config.LOG_LEVELS,
                        help="overrides the PQC2_LOG environment variable")
    sub = parser.add_subparsers(dest="command")

    # pki
    p_pki = sub.add_parser("pki", help="create CAs and issue certificates")
    pki_sub = p_pki.add_subparsers(dest="pki_command")
    p_init = pki_sub.add_parser("init-ca", help="create a self-signed CA")
    p_init.add_argument("--name", required=True)
    p_init.add_argument("--scheme", default="hash-merkle", choices=sig_names)
    p_init.add_argument("--depth", type=int, default=8,
                        help="hash-merkle tree depth (2^depth signatures)")
    p_init.add_argument("--out", required=True, metavar="DIR")
    p_init.set_defaults(func=_cmd_pki_init_ca)
    p_issue = pki_sub.add_parser("issue", help="issue a subject certificate")
    p_issue.add_argument("--ca", required=True, metavar="DIR",
                         help="directory created by pki init-ca")
    p_issue.add_argument("--subject", required=True)
    p_issue.add_argument("--role", default="other",
                         help="ground-station|monitor|agent|relay|broker|attacker|other")
    p_issue.add_argument("--scheme", default="hash-merkle", choices=sig_names)
    p_issue.add_argument("--depth", type=int, default=8)
    p_issue.add_argument("--days", type=float, default=30.0)
    p_issue.add_argument("--out", required=True, metavar="DIR")
    p_issue.set_defaults(func=_cmd_pki_issue)

    # broker
    p_broker = sub.add_parser("broker", help="run the message broker")
    p_broker.add_argument("--listen", default="127.0.0.1:7700", metavar="HOST:PORT")
    _identity_flags(p_broker, subject_default="broker")
    p_broker.add_argument("--authz", required=True, metavar="FILE",
                          help="topic authorization policy (YAML)")
    p_broker.add_argument("--capture", metavar="FILE",
                          help="record all frames to this capture file")
    p_broker.add_argument("--event-log", metavar="FILE",
                          help="append security events as JSON lines")
    p_broker.add_argument("--run-seconds", type=float, default=None,
                          help="exit after this long (default: run until Ctrl-C)")
    p_broker.set_defaults(func=_cmd_broker)

    # agents
    for name, fn, subject in (
        ("ground", _cmd_ground, "ground_station"),
        ("agent", _cmd_agent, "agent"),
        ("monitor", _cmd_monitor, "monitor"),
        ("relay", _cmd_relay, "relay"),
    ):
        p = sub.add_parser(name, help=f"run the {name} role")
        p.add_argument("--broker", default="127.0.0.1:7700", metavar="HOST:PORT")
        _identity_flags(p, subject_default=subject)
        p.add_argument("--run-seconds", type=float, default=None)
        if name == "ground":
            p.add_argument("--console-port", type=int, default=None,
                           help="serve the operator websocket bridge here")
            p.add_argument("--serve-ui", metavar="DIR", default=None,
                           help="also serve static console files (port+1)")
            p.add_argument("--watch-events", metavar="FILE", default=None,
                           help="mirror a broker event log into the console feed")
        if name == "monitor":
            p.add_argument("--watch-x-limit", type=float, default=None,
                           help="auto e-stop when status x exceeds this")
        if name == "relay":
            p.add_argument("--in-topic", default="/command_in")
            p.add_argument("--out-topic", default="/command")
        p.set_defaults(func=fn)

    # attacker
    p_atk = sub.add_parser("attacker", help="run one scripted attack")
    p_atk.add_argument("--kind", required=True,
                       choices=["forge", "tamper", "replay",
                                "unauthorized_publish", "flood", "eavesdrop"])
    p_atk.add_argument("--broker", default="127.0.0.1:7700", metavar="HOST:PORT")
    _identity_flags(p_atk, subject_default="attacker")
    p_atk.add_argument("--impersonate", default="ground_station")
    p_atk.add_argument("--topic", default="/command")
    p_atk.add_argument("--count", type=int, default=10)
    p_atk.add_argument("--captured-file", metavar="FILE",
                       help="hex wire envelopes, one per line (replay/tamper)")
    p_atk.add_argument("--capture", metavar="FILE",
                       help="capture file to search (eavesdrop)")
    p_atk.add_argument("--needle", metavar="HEX",
                       help="bytes to look for in the capture (eavesdrop)")
    p_atk.set_defaults(func=_cmd_attacker)

    # scenario
    p_scn = sub.add_parser("scenario", help="run scripted end-to-end scenarios")
    scn_sub = p_scn.add_subparsers(dest="scenario_command")
    p_run = scn_sub.add_parser("run", help="run a bundled or file scenario")
    p_run.add_argument("scenario", help="bundled name or a YAML file path")
    p_run.add_argument("--mode", default=None,
                       choices=["none", "app-sig", "channel", "both"])
    p_run.add_argument("--report", metavar="FILE", help="write the JSON report here")
    p_run.set_defaults(func=_cmd_scenario_run)
    p_list = scn_sub.add_parser("list", help="list bundled scenarios")
    p_list.set_defaults(func=_cmd_scenario_list)

    # bench
    p_bench = sub.add_parser("bench", help="measurement protocols")
    bench_sub = p_bench.add_subparsers(dest="bench_command")
    p_sv = bench_sub.add_parser("sign-verify", help="sign/verify time vs size")
    p_sv.add_argument("--out", required=True, metavar="DIR")
    p_sv.add_argument("--sizes", type=int, nargs="+", default=list(bench.SIGN_SIZES))
    p_sv.add_argument("--schemes", nargs="+", default=["hash-merkle", "rsa-2048"],
                      choices=sig_names)
    p_sv.add_argument("--reps", type=int, default=30)
    p_sv.set_defaults(func=_cmd_bench_sign_verify)
    p_tp = bench_sub.add_parser("throughput", help="paced delivery rate grid")
    p_tp.add_argument("--out", required=True, metavar="DIR")
    p_tp.add_argument("--modes", nargs="+", default=["none", "both"],
                      choices=["none", "app-sig", "channel", "both"])
    p_tp.add_argument("--sizes", type=int, nargs="+", default=list(bench.MSG_SIZES))
    p_tp.add_argument("--rates", type=float, nargs="+",
                      default=list(bench.TARGET_RATES))
    p_tp.add_argument("--duration", type=float, default=10.0)
    p_tp.set_defaults(func=_cmd_bench_throughput)
    p_hs = bench_sub.add_parser("handshake", help="connection setup time")
    p_hs.add_argument("--out", required=True, metavar="DIR")
    p_hs.add_argument("--suites", nargs="+", default=["pq", "classical"])
    p_hs.add_argument("--reps", type=int, default=20)
    p_hs.set_defaults(func=_cmd_bench_handshake)
    p_kr = bench_sub.add_parser("kernels", help="compiled vs pure hash kernels")
    p_kr.add_argument("--out", required=True, metavar="DIR")
    p_kr.add_argument("--reps", type=int, default=5)
    p_kr.set_defaults(func=_cmd_bench_kernels)

    # capture
    p_cap = sub.add_parser("capture", help="inspect capture files")
    cap_sub = p_cap.add_subparsers(dest="capture_command")
    p_scan = cap_sub.add_parser("scan", help="search captured bytes for a pattern")
    p_scan.add_argument("--capture", required=True, metavar="FILE")
    group = p_scan.add_mutually_exclusive_group(required=True)
    group.add_argument("--needle", metavar="HEX")
    group.add_argument("--needle-text", metavar="STR")
    p_scan.set_defaults(func=_cmd_capture_scan)

    # demo
    p_demo = sub.add_parser("demo", help="generate ready-to-run demo assets")
    demo_sub = p_demo.add_subparsers(dest="demo_command")
    p_dinit = demo_sub.add_parser("init", help="CA, certs, policy, scenarios")
    p_dinit.add_argument("directory", metavar="DIR")
    p_dinit.set_defaults(func=_cmd_demo_init)

    return parser


def _identity_flags(parser, subject_default: str) -> None:
    parser.add_argument("--subject", default=subject_default)
    parser.add_argument("--mode", default="none",
                        choices=["none", "app-sig", "channel", "both"])
    parser.add_argument("--cert", metavar="FILE")
    parser.add_argument("--key", metavar="FILE")
    parser.add_argument("--ca", metavar="FILE")
    parser.add_argument("--peers", metavar="DIR",
                        help="directory of peer .cert files (envelope verification)")
    parser.add_argument("--suites", nargs="+", default=None,
                        help="pq | classical | SIG+KEM+AEAD scheme names")


def _run_config(args, broker_attr="broker") -> config.RunConfig:
    return config.load_run_config(
        subject=args.subject,
        mode=args.mode,
        broker=getattr(args, broker_attr),
        cert=args.cert, key=args.key, ca=args.ca, peers=args.peers,
        authz_path=getattr(args, "authz", None),
        suites=args.suites,
        capture=getattr(args, "capture", None),
        console_port=getattr(args, "console_port", None),
        log_level=args.log_level,
    )


def _linger(run_seconds: Optional[float]) -> None:
    if run_seconds is not None:
        time.sleep(run_seconds)
        return
    while True:
        time.sleep(3600)


# -------------------------------------------------------------------- pki


def _fresh_path(path: str) -> str:
    if os.path.exists(path):
        raise ConfigError(f"refusing to overwrite existing {path!r}")
    return path


def _cmd_pki_init_ca(args) -> int:
    scheme_id = default_registry.by_name(
        args.scheme, SchemeKind.SIGNATURE).descriptor.scheme_id
    if args.depth < 1:
        raise ConfigError("depth must be >= 1")
    _fresh_path(os.path.join(args.out, "ca.cert"))
    kwargs = {"depth": args.depth} if scheme_id == 1 else {}
    ca, _cert = pki.create_ca(args.name, scheme_id, **kwargs)
    pki.save_ca(args.out, ca)
    print(f"CA {args.name!r} written to {args.out}")
    return EXIT_OK


def _cmd_pki_issue(args) -> int:
    try:
        role = pki.Role.from_name(args.role)
    except ValueError as exc:
        raise ConfigError(str(exc))
    scheme_id = default_registry.by_name(
        args.scheme, SchemeKind.SIGNATURE).descriptor.scheme_id
    if not os.path.isfile(os.path.join(args.ca, "ca.key")):
        raise ConfigError(f"{args.ca!r} does not contain a CA (run pki init-ca)")
    cert_path = _fresh_path(os.path.join(args.out, f"{args.subject}.cert"))
    key_path = _fresh_path(os.path.join(args.out, f"{args.subject}.key"))
    ca = pki.load_ca(args.ca)
    kwargs = {"depth": args.depth} if scheme_id == 1 else {}
    from pqc2 import crypto
    keypair = crypto.sig_keygen(scheme_id, **kwargs)
    now = int(time.time())
    cert = pki.issue_certificate(
        ca, args.subject, role, scheme_id, keypair.public_key,
        (now - 300, now + int(args.days * 86400)))
    os.makedirs(args.out, exist_ok=True)
    pki.save_certificate(cert_path, cert)
    keyfiles.save_secret_key(key_path, default_registry, keypair)
    pki.save_ca(args.ca, ca)  # persists the advanced serial + OTS index
    print(f"issued {args.subject!r} ({role.name.lower()}) -> {cert_path}")
    return EXIT_OK


# ------------------------------------------------------------------ roles


def _cmd_broker(args) -> int:
    run = _run_config(args, broker_attr="listen")
    if run.policy is None:
        raise ConfigError("broker requires --authz")
    cfg = BrokerConfig(
        policy=run.policy, host=run.broker_host, port=run.broker_port,
        mode=run.mode, trust_store=run.trust_store, certificate=run.certificate,
        keypair=run.keypair, channel_config=run.channel_config(),
        capture_path=run.capture_path, event_log_path=args.event_log,
    )
    with Broker(cfg) as broker:
        print(f"broker listening on {broker.address} (mode {run.mode})")
        _linger(args.run_seconds)
    return EXIT_OK


def _cmd_ground(args) -> int:
    run = _run_config(args)
    cfg = GroundConfig(
        identity=run.identity(), host=run.broker_host, port=run.broker_port,
        mode=run.mode, console_port=run.console_port, serve_ui=args.serve_ui,
        watch_events=args.watch_events, channel_config=run.channel_config(),
    )
    with GroundStation(cfg):
        if run.console_port is not None:
            print(f"ground station up; console on ws://127.0.0.1:{run.console_port}/")
        else:
            print("ground station up")
        _linger(args.run_seconds)
    return EXIT_OK


def _cmd_agent(args) -> int:
    run = _run_config(args)
    cfg = MobileConfig(
        identity=run.identity(), host=run.broker_host, port=run.broker_port,
        mode=run.mode, channel_config=run.channel_config(),
    )
    with MobileAgent(cfg) as agent:
        print("agent up")
        _linger(args.run_seconds)
        snap = agent.snapshot()
        print(f"final pose x={snap.pose.x:.3f} y={snap.pose.y:.3f} "
              f"theta={snap.pose.theta:.3f} estop={snap.estop}")
    return EXIT_OK


def _cmd_monitor(args) -> int:
    run = _run_config(args)
    watchdog = None
    if args.watch_x_limit is not None:
        limit = args.watch_x_limit

        def watchdog(status, limit=limit):
            return abs(status.get("x", 0.0)) > limit

    cfg = MonitorConfig(
        identity=run.identity(), host=run.broker_host, port=run.broker_port,
        mode=run.mode, watchdog=watchdog, channel_config=run.channel_config(),
    )
    with Monitor(cfg):
        print("monitor up")
        _linger(args.run_seconds)
    return EXIT_OK


def _cmd_relay(args) -> int:
    run = _run_config(args)
    cfg = RelayConfig(
        identity=run.identity(), host=run.broker_host, port=run.broker_port,
        mode=run.mode, in_topic=args.in_topic, out_topic=args.out_topic,
        channel_config=run.channel_config(),
    )
    with RelayAgent(cfg) as relay:
        print(f"relay up: {args.in_topic} -> {args.out_topic}")
        _linger(args.run_seconds)
        print(f"forwarded {relay.forwarded}, dropped {relay.dropped}")
    return EXIT_OK


def _cmd_attacker(args) -> int:
    run = _run_config(args)
    captured = []
    if args.captured_file:
        if not os.path.isfile(args.captured_file):
            raise ConfigError(f"captured file not found: {args.captured_file!r}")
        with open(args.captured_file, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    captured.append(bytes.fromhex(line))
    needle = bytes.fromhex(args.needle) if args.needle else None
    ctx = AttackContext(
        host=run.broker_host, port=run.broker_port, mode=run.mode,
        identity=run.identity(), impersonate=args.impersonate, topic=args.topic,
        count=args.count, captured=captured, capture_path=run.capture_path,
        needle=needle, channel_config=run.channel_config(),
    )
    report = run_attack(args.kind, ctx)
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK


# --------------------------------------------------------------- scenarios


def _cmd_scenario_run(args) -> int:
    if os.path.isfile(args.scenario):
        spec = scenario_load_file(args.scenario)
    elif args.scenario in bundled_scenario_names():
        spec = load_bundled_scenario(args.scenario)
    else:
        raise ConfigError(
            f"{args.scenario!r} is neither a file nor a bundled scenario "
            f"(bundled: {', '.join(bundled_scenario_names())})")
    report = scenario_run(spec, mode=args.mode, report_path=args.report)
    for act in report.actions:
        status = "ok  " if act.ok else "FAIL"
        print(f"{status} [{act.at:>4}] {act.actor:<14} {act.action:<14} "
              f"{act.outcome} {act.detail}")
    print(f"scenario {report.name!r} mode={report.mode}: "
          f"{'PASS' if report.ok else 'FAIL'} "
          f"({sum(1 for a in report.actions if a.ok)}/{len(report.actions)} "
          f"expectations, {report.duration_s:.1f}s)")
    return EXIT_OK if report.ok else EXIT_EXPECTATION


def _cmd_scenario_list(args) -> int:
    for name in bundled_scenario_names():
        print(name)
    return EXIT_OK


# ------------------------------------------------------------------- bench


def _out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _cmd_bench_sign_verify(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    out = _out_dir(args.out)
    scheme_ids = [default_registry.by_name(n, SchemeKind.SIGNATURE).descriptor.scheme_id
                  for n in args.schemes]
    records = bench.bench_sign_verify(scheme_ids, args.sizes, args.reps)
    bench.write_csv(records, os.path.join(out, "sign_verify.csv"))
    bench.emit_plot(records, os.path.join(out, "sign_verify.svg"))
    for r in records:
        print(f"{r.scheme:12s} {r.size_bytes:>8d} B  sign {r.sign_mean_us:10.1f} us  "
              f"verify {r.verify_mean_us:10.1f} us")
    for note in bench.crossover_notes(records):
        print(note)
    print(f"wrote {out}/sign_verify.csv and .svg")
    return EXIT_OK


def _cmd_bench_throughput(args) -> int:
    out = _out_dir(args.out)
    records = bench.bench_throughput(args.modes, args.sizes, args.rates,
                                     args.duration)
    bench.write_csv(records, os.path.join(out, "throughput.csv"))
    bench.emit_plot(records, os.path.join(out, "throughput.svg"))
    for r in records:
        print(f"{r.mode:8s} {r.size_bytes:>7d} B  target {r.target_hz:7.1f} Hz  "
              f"achieved {r.achieved_hz:8.3f} Hz")
    print(f"wrote {out}/throughput.csv and .svg")
    return EXIT_OK


def _cmd_bench_handshake(args) -> int:
    out = _out_dir(args.out)
    suites = [config.parse_suite(t) for t in args.suites]
    records = bench.bench_handshake(suites, args.reps)
    bench.write_csv(records, os.path.join(out, "handshake.csv"))
    bench.emit_plot(records, os.path.join(out, "handshake.svg"))
    for r in records:
        print(f"{r.suite:40s} mean {r.mean_ms:8.2f} ms  median {r.median_ms:8.2f} ms")
    print(f"wrote {out}/handshake.csv and .svg")
    return EXIT_OK


def _cmd_bench_kernels(args) -> int:
    out = _out_dir(args.out)
    records = bench.bench_kernels(reps=args.reps)
    bench.write_csv(records, os.path.join(out, "kernels.csv"))
    bench.emit_plot(records, os.path.join(out, "kernels.svg"))
    for r in records:
        print(f"{r.backend:8s} {r.op:18s} {r.mean_us:12.1f} us")
    backends = {r.backend for r in records}
    if {"cython", "python"} <= backends:
        ratio = {}
        for r in records:
            ratio.setdefault(r.op, {})[r.backend] = r.mean_us
        for op, vals in ratio.items():
            print(f"{op}: compiled is {vals['python'] / vals['cython']:.1f}x faster")
    print(f"wrote {out}/kernels.csv and .svg")
    return EXIT_OK


# ----------------------------------------------------------------- capture


def _cmd_capture_scan(args) -> int:
    if args.needle is not None:
        try:
            needle = bytes.fromhex(args.needle)
        except ValueError:
            raise ConfigError("--needle must be hex")
    else:
        needle = args.needle_text.encode()
    if not needle:
        raise ConfigError("needle must be non-empty")
    if not os.path.isfile(args.capture):
        raise ConfigError(f"capture file not found: {args.capture!r}")
    records = capture_load(args.capture)
    hits = capture_scan(records, needle)
    for rec_index, offset in hits:
        rec = records[rec_index]
        direction = "in " if rec.direction == 0 else "out"
        print(f"record {rec_index} ({direction} {rec.peer}) offset {offset}")
    print(f"{len(hits)} hit(s) across {len(records)} record(s)")
    return EXIT_OK


# -------------------------------------------------------------------- demo


def _cmd_demo_init(args) -> int:
    root = args.directory
    if os.path.exists(root) and os.listdir(root):
        raise ConfigError(f"{root!r} exists and is not empty")
    os.makedirs(root, exist_ok=True)
    ca_dir = os.path.join(root, "ca")
    certs_dir = os.path.join(root, "certs")
    keys_dir = os.path.join(root, "keys")
    scen_dir = os.path.join(root, "scenarios")
    for d in (certs_dir, keys_dir, scen_dir):
        os.makedirs(d)

    ca, _ = pki.create_ca("demo-ca", 1, depth=6)
    pki.save_ca(ca_dir, ca)
    now = int(time.time())
    from pqc2 import crypto
    for subject, role in sorted(IDENTITY_ROLES.items()):
        kp = crypto.sig_keygen(1, depth=10)
        cert = pki.issue_certificate(
            ca, subject, role, 1, kp.public_key, (now - 300, now + 30 * 86400))
        pki.save_certificate(os.path.join(certs_dir, f"{subject}.cert"), cert)
        keyfiles.save_secret_key(
            os.path.join(keys_dir, f"{subject}.key"), default_registry, kp)
    pki.save_ca(ca_dir, ca)

    with open(os.path.join(root, "authz.yaml"), "w", encoding="utf-8") as fh:
        fh.write(authz.DEMO_POLICY_TEXT)
    import importlib.resources
    scen_root = importlib.resources.files("pqc2.agents") / "scenarios"
    for entry in scen_root.iterdir():
        if entry.name.endswith(".yaml"):
            shutil.copyfile(str(entry), os.path.join(scen_dir, entry.name))

    quickstart = f"""\
demo assets
===========

broker (secure both-layers mode):
  pqc2 broker --listen 127.0.0.1:7700 --mode both --authz {root}/authz.yaml \\
      --subject broker --cert {root}/certs/broker.cert --key {root}/keys/broker.key \\
      --ca {root}/ca/ca.cert --capture {root}/wire.pqcp

agent / ground station / monitor (separate shells):
  pqc2 agent   --broker 127.0.0.1:7700 --mode both --subject agent \\
      --cert {root}/certs/agent.cert --key {root}/keys/agent.key \\
      --ca {root}/ca/ca.cert --peers {root}/certs
  pqc2 ground  --broker 127.0.0.1:7700 --mode both --subject ground_station \\
      --cert {root}/certs/ground_station.cert --key {root}/keys/ground_station.key \\
      --ca {root}/ca/ca.cert --peers {root}/certs --console-port 8800
  pqc2 monitor --broker 127.0.0.1:7700 --mode both --subject monitor \\
      --cert {root}/certs/monitor.cert --key {root}/keys/monitor.key \\
      --ca {root}/ca/ca.cert --peers {root}/certs --watch-x-limit 5.0

one-command scripted runs (no processes to juggle):
  pqc2 scenario run table1-demo
  pqc2 scenario run estop --mode both
  pqc2 scenario run fig5 --mode channel

inspect a capture:
  pqc2 capture scan --capture {root}/wire.pqcp --needle-text anything
"""
    with open(os.path.join(root, "README.txt"), "w", encoding="utf-8") as fh:
        fh.write(quickstart)
    print(f"demo assets written under {root}/")
    print(f"start with: cat {root}/README.txt")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
