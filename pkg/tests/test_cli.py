"""Command line behavior: exit codes, artifact generation, validation order.

Most tests drive cli.main() in-process for speed; one subprocess test proves
the installed entry point resolves.
"""

import json
import socket
import subprocess
import sys
import threading
import time

import pytest
import yaml

from pqc2 import authz, cli, pki
from pqc2.bus import capture


def run_cli(*argv):
    return cli.main(list(argv))


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


HELP_PATHS = [
    [],
    ["pki"],
    ["pki", "init-ca"],
    ["pki", "issue"],
    ["broker"],
    ["ground"],
    ["agent"],
    ["monitor"],
    ["relay"],
    ["attacker"],
    ["scenario"],
    ["scenario", "run"],
    ["bench"],
    ["bench", "sign-verify"],
    ["bench", "throughput"],
    ["bench", "handshake"],
    ["bench", "kernels"],
    ["capture"],
    ["capture", "scan"],
    ["demo"],
    ["demo", "init"],
]


class TestExitCodes:
    @pytest.mark.parametrize("path", HELP_PATHS,
                             ids=[" ".join(p) or "root" for p in HELP_PATHS])
    def test_help_exits_zero(self, path, capsys):
        assert run_cli(*path, "--help") == 0
        assert "usage:" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        assert run_cli("--frobnicate") == 1

    def test_unknown_subcommand(self, capsys):
        assert run_cli("explode") == 1

    def test_no_subcommand_prints_usage(self, capsys):
        assert run_cli() == 1
        assert "usage:" in capsys.readouterr().err

    def test_missing_required_flag(self, capsys):
        # broker without --authz: argparse required error, remapped to 1
        assert run_cli("broker", "--listen", "127.0.0.1:1") == 1

    def test_invalid_mode_choice(self, capsys):
        assert run_cli("agent", "--mode", "tls") == 1

    def test_bad_log_level_env(self, capsys, monkeypatch):
        monkeypatch.setenv("PQC2_LOG", "loud")
        assert run_cli("scenario", "list") == 1
        assert "config error" in capsys.readouterr().err

    def test_log_level_flag_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("PQC2_LOG", "loud")
        assert run_cli("--log-level", "error", "scenario", "list") == 0

    def test_entry_point_resolves(self):
        proc = subprocess.run([sys.executable, "-m", "pqc2.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("usage: pqc2")


class TestPkiCommands:
    def test_init_ca_layout(self, tmp_path, capsys):
        out = tmp_path / "ca"
        assert run_cli("pki", "init-ca", "--name", "ops", "--out", str(out),
                       "--depth", "4") == 0
        assert {p.name for p in out.iterdir()} == {"ca.cert", "ca.key", "ca.json"}

    def test_init_ca_refuses_overwrite(self, tmp_path, capsys):
        out = tmp_path / "ca"
        run_cli("pki", "init-ca", "--name", "ops", "--out", str(out),
                "--depth", "4")
        assert run_cli("pki", "init-ca", "--name", "ops2", "--out", str(out),
                       "--depth", "4") == 1
        assert "refusing to overwrite" in capsys.readouterr().err

    def test_issue_chains_to_ca(self, tmp_path, capsys):
        ca_dir, out = tmp_path / "ca", tmp_path / "certs"
        run_cli("pki", "init-ca", "--name", "ops", "--out", str(ca_dir),
                "--depth", "4")
        assert run_cli("pki", "issue", "--ca", str(ca_dir),
                       "--subject", "rover", "--role", "agent",
                       "--depth", "4", "--out", str(out)) == 0
        ca = pki.load_ca(str(ca_dir))
        cert = pki.load_certificate(str(out / "rover.cert"))
        trust = pki.TrustStore([ca.certificate])
        assert pki.verify_certificate(trust, cert, int(time.time()))
        assert cert.role == pki.Role.AGENT
        assert (out / "rover.key").exists()

    def test_issue_serial_advances(self, tmp_path, capsys):
        ca_dir, out = tmp_path / "ca", tmp_path / "certs"
        run_cli("pki", "init-ca", "--name", "ops", "--out", str(ca_dir),
                "--depth", "4")
        run_cli("pki", "issue", "--ca", str(ca_dir), "--subject", "a",
                "--depth", "2", "--out", str(out))
        run_cli("pki", "issue", "--ca", str(ca_dir), "--subject", "b",
                "--depth", "2", "--out", str(out))
        ca = pki.load_certificate(str(out / "a.cert"))
        cb = pki.load_certificate(str(out / "b.cert"))
        assert cb.serial > ca.serial

    def test_issue_bad_role(self, tmp_path, capsys):
        ca_dir = tmp_path / "ca"
        run_cli("pki", "init-ca", "--name", "ops", "--out", str(ca_dir),
                "--depth", "4")
        assert run_cli("pki", "issue", "--ca", str(ca_dir),
                       "--subject", "x", "--role", "janitor",
                       "--out", str(tmp_path / "c")) == 1

    def test_issue_without_ca(self, tmp_path, capsys):
        assert run_cli("pki", "issue", "--ca", str(tmp_path / "nope"),
                       "--subject", "x", "--out", str(tmp_path / "c")) == 1

    def test_rsa_ca(self, tmp_path, capsys):
        out = tmp_path / "ca"
        assert run_cli("pki", "init-ca", "--name", "ops", "--out", str(out),
                       "--scheme", "rsa-2048") == 0
        assert pki.load_ca(str(out)).certificate.scheme_id == 2


class TestDemoInit:
    def test_layout(self, tmp_path, capsys):
        root = tmp_path / "demo"
        assert run_cli("demo", "init", str(root)) == 0
        rel = {str(p.relative_to(root)) for p in root.rglob("*") if p.is_file()}
        assert "authz.yaml" in rel
        assert "README.txt" in rel
        assert "ca/ca.cert" in rel
        for subject in ("agent", "ground_station", "monitor", "relay",
                        "attacker", "broker"):
            assert f"certs/{subject}.cert" in rel
            assert f"keys/{subject}.key" in rel
        for name in ("table1-demo", "estop", "fig5"):
            assert f"scenarios/{name}.yaml" in rel

    def test_policy_file_is_the_demo_policy(self, tmp_path, capsys):
        root = tmp_path / "demo"
        run_cli("demo", "init", str(root))
        policy = authz.policy_load_file(str(root / "authz.yaml"))
        assert authz.check(policy, "ground_station", "/command", "publish")
        assert not authz.check(policy, "attacker", "/command", "publish")

    def test_certs_chain(self, tmp_path, capsys):
        root = tmp_path / "demo"
        run_cli("demo", "init", str(root))
        ca = pki.load_ca(str(root / "ca"))
        trust = pki.TrustStore([ca.certificate])
        now = int(time.time())
        for subject in ("agent", "broker"):
            cert = pki.load_certificate(str(root / "certs" / f"{subject}.cert"))
            assert pki.verify_certificate(trust, cert, now)

    def test_refuses_nonempty_dir(self, tmp_path, capsys):
        root = tmp_path / "demo"
        root.mkdir()
        (root / "keep.txt").write_text("mine")
        assert run_cli("demo", "init", str(root)) == 1
        assert (root / "keep.txt").read_text() == "mine"

    def test_readme_names_real_commands(self, tmp_path, capsys):
        root = tmp_path / "demo"
        run_cli("demo", "init", str(root))
        text = (root / "README.txt").read_text()
        assert "pqc2 broker" in text
        assert "scenario run table1-demo" in text


class TestScenarioCommands:
    def test_list(self, capsys):
        assert run_cli("scenario", "list") == 0
        assert capsys.readouterr().out.split() == ["estop", "fig5", "table1-demo"]

    def test_run_pass(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        assert run_cli("scenario", "run", "estop", "--mode", "none",
                       "--report", str(report)) == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        data = json.loads(report.read_text())
        assert data["ok"] is True
        assert data["name"] == "estop"

    def test_run_expectation_failure_exits_3(self, tmp_path, capsys):
        spec = tmp_path / "s.yaml"
        spec.write_text(yaml.safe_dump({
            "name": "x",
            "mode": "none",
            "cast": ["ground_station"],
            "timeline": [{"at": 0, "actor": "ground_station",
                          "action": "probe",
                          "args": {"topic": "/command", "op": "publish"},
                          "expect": "denied"}],
        }))
        assert run_cli("scenario", "run", str(spec)) == 3
        assert "FAIL" in capsys.readouterr().out

    def test_run_unknown_name(self, capsys):
        assert run_cli("scenario", "run", "no-such-thing") == 1
        assert "bundled" in capsys.readouterr().err

    def test_run_malformed_file(self, tmp_path, capsys):
        spec = tmp_path / "bad.yaml"
        spec.write_text("timeline: [not, a, scenario]")
        assert run_cli("scenario", "run", str(spec)) == 2

    def test_bad_mode_flag(self, capsys):
        assert run_cli("scenario", "run", "estop", "--mode", "tls") == 1


class TestBenchCommands:
    def test_sign_verify_artifacts(self, tmp_path, capsys):
        out = tmp_path / "b"
        assert run_cli("bench", "sign-verify", "--out", str(out),
                       "--sizes", "64", "--reps", "2",
                       "--schemes", "hash-merkle") == 0
        assert (out / "sign_verify.csv").exists()
        assert (out / "sign_verify.svg").exists()
        header = (out / "sign_verify.csv").read_text().splitlines()[0]
        assert header.startswith("scheme,size_bytes,reps,")

    def test_kernels_artifacts(self, tmp_path, capsys):
        out = tmp_path / "b"
        assert run_cli("bench", "kernels", "--out", str(out),
                       "--reps", "1") == 0
        assert (out / "kernels.csv").exists()
        out_text = capsys.readouterr().out
        assert "python" in out_text

    def test_throughput_short(self, tmp_path, capsys):
        out = tmp_path / "b"
        assert run_cli("bench", "throughput", "--out", str(out),
                       "--modes", "none", "--sizes", "706",
                       "--rates", "25", "--duration", "0.3") == 0
        lines = (out / "throughput.csv").read_text().splitlines()
        assert lines[0] == "mode,size_bytes,target_hz,achieved_hz,duration_s"
        assert float(lines[1].split(",")[3]) <= 25.0 * 1.0000001

    def test_handshake_short(self, tmp_path, capsys):
        out = tmp_path / "b"
        assert run_cli("bench", "handshake", "--out", str(out),
                       "--suites", "pq", "--reps", "2") == 0
        assert "hash-merkle+x25519+aes-256-gcm" in capsys.readouterr().out

    def test_bad_reps(self, tmp_path, capsys):
        assert run_cli("bench", "sign-verify", "--out", str(tmp_path),
                       "--reps", "0") == 1

    def test_bad_suite_name(self, tmp_path, capsys):
        assert run_cli("bench", "handshake", "--out", str(tmp_path),
                       "--suites", "quantum-magic", "--reps", "1") == 1


class TestCaptureScanCommand:
    @pytest.fixture()
    def capture_file(self, tmp_path):
        path = tmp_path / "wire.pqcp"
        writer = capture.CaptureWriter(str(path))
        writer.record(0, "10.0.0.1:1", b"hello MARKER world")
        writer.record(1, "10.0.0.2:2", b"nothing here")
        writer.record(0, "10.0.0.1:1", b"MARKER again MARKER")
        writer.close()
        return path

    def test_scan_text(self, capture_file, capsys):
        assert run_cli("capture", "scan", "--capture", str(capture_file),
                       "--needle-text", "MARKER") == 0
        out = capsys.readouterr().out
        assert "3 hit(s) across 3 record(s)" in out
        assert "record 0" in out and "record 2" in out

    def test_scan_hex(self, capture_file, capsys):
        assert run_cli("capture", "scan", "--capture", str(capture_file),
                       "--needle", b"MARKER".hex()) == 0
        assert "3 hit(s)" in capsys.readouterr().out

    def test_scan_no_hits(self, capture_file, capsys):
        assert run_cli("capture", "scan", "--capture", str(capture_file),
                       "--needle-text", "absent") == 0
        assert "0 hit(s)" in capsys.readouterr().out

    def test_bad_hex(self, capture_file, capsys):
        assert run_cli("capture", "scan", "--capture", str(capture_file),
                       "--needle", "zz") == 1

    def test_missing_file(self, tmp_path, capsys):
        assert run_cli("capture", "scan", "--capture",
                       str(tmp_path / "nope.pqcp"),
                       "--needle-text", "x") == 1

    def test_corrupt_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.pqcp"
        bad.write_bytes(b"NOPE not a capture")
        assert run_cli("capture", "scan", "--capture", str(bad),
                       "--needle-text", "x") == 2

    def test_needle_flags_are_exclusive(self, capture_file, capsys):
        assert run_cli("capture", "scan", "--capture", str(capture_file),
                       "--needle", "aa", "--needle-text", "x") == 1


class TestLiveRoles:
    def test_broker_agent_attacker_round(self, tmp_path, capsys):
        port = free_port()
        demo = tmp_path / "demo"
        run_cli("demo", "init", str(demo))
        rc = {}
        broker_thread = threading.Thread(
            target=lambda: rc.setdefault("broker", run_cli(
                "broker", "--listen", f"127.0.0.1:{port}",
                "--authz", str(demo / "authz.yaml"), "--mode", "none",
                "--run-seconds", "3")),
            daemon=True)
        broker_thread.start()
        deadline = time.time() + 2
        while time.time() < deadline:
            try:
                socket.create_connection(("127.0.0.1", port), 0.2).close()
                break
            except OSError:
                time.sleep(0.05)
        assert run_cli("agent", "--broker", f"127.0.0.1:{port}",
                       "--mode", "none", "--run-seconds", "0.5") == 0
        assert run_cli("attacker", "--kind", "forge",
                       "--broker", f"127.0.0.1:{port}", "--mode", "none",
                       "--count", "2") == 0
        out = capsys.readouterr().out
        assert "final pose" in out
        report = json.loads(out[out.index("{"):out.rindex("}") + 1])
        assert report["kind"] == "forge"
        assert report["sent"] == 2
        broker_thread.join(timeout=5)
        assert rc.get("broker") == 0

    def test_ground_secure_mode_needs_identity(self, capsys):
        assert run_cli("ground", "--mode", "both", "--run-seconds", "0.1") == 1
        err = capsys.readouterr().err
        assert "certificate" in err

    def test_broker_bad_authz_path(self, tmp_path, capsys):
        assert run_cli("broker", "--listen", "127.0.0.1:1",
                       "--authz", str(tmp_path / "missing.yaml"),
                       "--run-seconds", "0.1") == 1
