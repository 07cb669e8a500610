#!/usr/bin/env python3
"""Regenerate the golden wire-format vectors under testdata/.

The vectors pin the envelope and certificate byte layouts: they were
produced once from fixed seeds, cross-checked field by field against the
independent parsers in tests/oracles.py, and committed. Regenerating must
be byte-identical unless the wire format itself changes deliberately.
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from pqc2 import crypto, envelope, pki  # noqa: E402

OUT_ENVELOPES = ROOT / "testdata" / "envelopes"
OUT_CERTS = ROOT / "testdata" / "certs"

FIXED_TS = 1_700_000_000_000  # ms
FIXED_NOW = 1_700_000_000  # s


def write_hex(path: Path, blob: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [blob.hex()[i : i + 64] for i in range(0, len(blob.hex()), 64)]
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(blob)} bytes)")


def main() -> None:
    # envelope signed with the all-zero-seed hash-based key, depth 2
    key = crypto.sig_keygen(1, seed=bytes(32), depth=2)
    counter = envelope.SeqCounter()
    env = envelope.seal(
        key, "ground_station", "/command", counter, b'{"v": 1.0, "omega": 0.0}',
        clock=lambda: FIXED_TS,
    )
    write_hex(OUT_ENVELOPES / "command-hashsig-seed00.hex", envelope.encode_wire(env))

    env2 = envelope.seal_unsigned(
        "monitor", "/status", envelope.SeqCounter(), b'{"x": 0.0}',
        clock=lambda: FIXED_TS,
    )
    write_hex(OUT_ENVELOPES / "status-unsigned.hex", envelope.encode_wire(env2))

    # certificate chain from the all-0x01-seed CA, fixed validity
    ca, ca_cert = pki.create_ca(
        "groundCA", 1, seed=b"\x01" * 32, depth=2, now=FIXED_NOW,
        validity_seconds=86400,
    )
    write_hex(OUT_CERTS / "ca-selfsigned-seed01.hex", pki.cert_encode(ca_cert))

    subject_key = crypto.sig_keygen(1, seed=bytes(32), depth=2)
    cert = pki.issue_certificate(
        ca, "ground-station", pki.Role.GROUND_STATION, 1,
        subject_key.public_key, (FIXED_NOW, FIXED_NOW + 3600),
    )
    write_hex(OUT_CERTS / "ground-station-seed00.hex", pki.cert_encode(cert))


if __name__ == "__main__":
    main()
