"""CA, certificate encoding, and trust store verification."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2 import crypto, pki
from pqc2.errors import (
    BadCertificate,
    EmptyName,
    InvalidWindow,
    MalformedCertificate,
    UnknownScheme,
)

import oracles

NOW = 1_700_000_000


@pytest.fixture(scope="module")
def ca_pq():
    ca, cert = pki.create_ca("groundCA", 1, seed=b"\xca" * 32, depth=6, now=NOW)
    return ca, cert


@pytest.fixture(scope="module")
def ca_rsa():
    return pki.create_ca("legacyCA", 2, now=NOW)


def _issue(ca, subject="ground-station", role=pki.Role.GROUND_STATION,
           window=(NOW, NOW + 3600)):
    kp = crypto.sig_keygen(1, seed=len(subject).to_bytes(1, "big") * 32, depth=2)
    return pki.issue_certificate(ca, subject, role, 1, kp.public_key, window)


class TestCreateCa:
    @pytest.mark.parametrize("scheme_id", [1, 2])
    def test_self_signed_verifies_under_itself(self, ca_pq, ca_rsa, scheme_id):
        _, cert = {1: ca_pq, 2: ca_rsa}[scheme_id]
        store = pki.TrustStore([cert])
        decision = pki.verify_certificate(store, cert, NOW + 10)
        assert decision.allow

    def test_issuer_equals_subject(self, ca_pq):
        _, cert = ca_pq
        assert cert.issuer == cert.subject == "groundCA"
        assert cert.serial == 0

    def test_empty_name(self):
        with pytest.raises(EmptyName):
            pki.create_ca("", 1)

    def test_unknown_scheme(self):
        with pytest.raises(UnknownScheme):
            pki.create_ca("x", 99)

    def test_aead_scheme_rejected(self):
        with pytest.raises(UnknownScheme):
            pki.create_ca("x", 16)


class TestIssue:
    def test_issue_then_verify(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca)
        store = pki.TrustStore([ca_cert])
        assert pki.verify_certificate(store, cert, NOW + 1).allow

    def test_serials_monotonic(self, ca_pq):
        ca, _ = ca_pq
        first = _issue(ca, "a")
        second = _issue(ca, "b")
        assert second.serial == first.serial + 1

    def test_empty_window(self, ca_pq):
        ca, _ = ca_pq
        with pytest.raises(InvalidWindow):
            _issue(ca, window=(NOW, NOW))
        with pytest.raises(InvalidWindow):
            _issue(ca, window=(NOW + 1, NOW))

    def test_empty_subject(self, ca_pq):
        ca, _ = ca_pq
        with pytest.raises(EmptyName):
            _issue(ca, subject="")


class TestVerify:
    def test_expired(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca, window=(NOW, NOW + 100))
        store = pki.TrustStore([ca_cert])
        decision = pki.verify_certificate(store, cert, NOW + 101)
        assert not decision.allow and decision.reason == pki.EXPIRED

    def test_boundary_instants_are_valid(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca, window=(NOW, NOW + 100))
        store = pki.TrustStore([ca_cert])
        assert pki.verify_certificate(store, cert, NOW).allow
        assert pki.verify_certificate(store, cert, NOW + 100).allow

    def test_not_yet_valid(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca, window=(NOW + 50, NOW + 100))
        store = pki.TrustStore([ca_cert])
        decision = pki.verify_certificate(store, cert, NOW)
        assert decision.reason == pki.NOT_YET_VALID

    def test_unknown_issuer(self, ca_pq, ca_rsa):
        ca, _ = ca_pq
        _, other_cert = ca_rsa
        cert = _issue(ca)
        store = pki.TrustStore([other_cert])
        decision = pki.verify_certificate(store, cert, NOW + 1)
        assert decision.reason == pki.UNKNOWN_ISSUER

    def test_cross_ca_never_verifies(self, ca_pq):
        ca, _ = ca_pq
        imposter, imposter_cert = pki.create_ca(
            "groundCA", 1, seed=b"\xee" * 32, depth=2, now=NOW
        )
        cert = _issue(ca)
        # same issuer name, different key: signature must not check out
        store = pki.TrustStore([imposter_cert])
        decision = pki.verify_certificate(store, cert, NOW + 1)
        assert decision.reason == pki.BAD_SIGNATURE

    def test_pin_match_and_mismatch(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca, "agent-1", pki.Role.AGENT)
        good = pki.TrustStore([ca_cert], {"agent-1": cert.public_key})
        assert pki.verify_certificate(good, cert, NOW + 1).allow
        bad = pki.TrustStore([ca_cert], {"agent-1": b"\x00" * 32})
        decision = pki.verify_certificate(bad, cert, NOW + 1)
        assert decision.reason == pki.PIN_MISMATCH

    def test_pin_for_other_subject_ignored(self, ca_pq):
        ca, ca_cert = ca_pq
        cert = _issue(ca, "agent-2", pki.Role.AGENT)
        store = pki.TrustStore([ca_cert], {"someone-else": b"\x00" * 32})
        assert pki.verify_certificate(store, cert, NOW + 1).allow


class TestTrustStore:
    def test_rejects_non_self_signed_anchor(self, ca_pq):
        ca, _ = ca_pq
        cert = _issue(ca)
        with pytest.raises(BadCertificate):
            pki.TrustStore([cert])

    def test_rejects_tampered_anchor(self, ca_pq):
        _, ca_cert = ca_pq
        broken = pki.Certificate(
            subject=ca_cert.subject,
            role=ca_cert.role,
            scheme_id=ca_cert.scheme_id,
            public_key=ca_cert.public_key,
            not_before=ca_cert.not_before,
            not_after=ca_cert.not_after + 999,  # signed field changed
            serial=ca_cert.serial,
            issuer=ca_cert.issuer,
            signature=ca_cert.signature,
        )
        with pytest.raises(BadCertificate):
            pki.TrustStore([broken])


class TestEncoding:
    def test_round_trip(self, ca_pq):
        ca, ca_cert = ca_pq
        for cert in (ca_cert, _issue(ca, "rt", pki.Role.MONITOR)):
            assert pki.cert_decode(pki.cert_encode(cert)) == cert

    def test_matches_independent_parser(self, ca_pq):
        ca, _ = ca_pq
        cert = _issue(ca, "oracle-check", pki.Role.RELAY, (NOW, NOW + 42))
        parsed = oracles.parse_certificate(pki.cert_encode(cert))
        assert parsed["subject"] == "oracle-check"
        assert parsed["role"] == int(pki.Role.RELAY)
        assert parsed["scheme_id"] == 1
        assert parsed["public_key"] == cert.public_key
        assert parsed["not_before"] == NOW
        assert parsed["not_after"] == NOW + 42
        assert parsed["serial"] == cert.serial
        assert parsed["issuer"] == "groundCA"
        assert parsed["sig_scheme"] == 1
        assert parsed["sig_ots_index"] == cert.signature.ots_index
        assert parsed["sig_bytes"] == cert.signature.data

    def test_rsa_sigblob_has_no_index(self, ca_rsa):
        ca, _ = ca_rsa
        kp = crypto.sig_keygen(1, seed=bytes(32), depth=2)
        cert = pki.issue_certificate(
            ca, "mixed", pki.Role.AGENT, 1, kp.public_key, (NOW, NOW + 10)
        )
        parsed = oracles.parse_certificate(pki.cert_encode(cert))
        assert parsed["sig_scheme"] == 2
        assert parsed["sig_ots_index"] is None

    def test_empty_input(self):
        with pytest.raises(MalformedCertificate):
            pki.cert_decode(b"")

    def test_decode_total_on_garbage(self, ca_pq):
        ca, _ = ca_pq
        wire = pki.cert_encode(_issue(ca, "fuzzee"))
        rng = random.Random(7)
        for _ in range(400):
            choice = rng.randrange(3)
            if choice == 0:
                data = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 80)))
            elif choice == 1:
                data = wire[: rng.randrange(len(wire))]
            else:
                flipped = bytearray(wire)
                flipped[rng.randrange(len(wire))] ^= 1 << rng.randrange(8)
                data = bytes(flipped)
            try:
                pki.cert_decode(data)
            except MalformedCertificate:
                pass  # only this exception is allowed to escape

    def test_trailing_bytes_rejected(self, ca_pq):
        ca, _ = ca_pq
        wire = pki.cert_encode(_issue(ca, "strict"))
        with pytest.raises(MalformedCertificate):
            pki.cert_decode(wire + b"\x00")

    @settings(deadline=None, max_examples=20)
    @given(
        subject=st.text(min_size=1, max_size=40),
        role=st.sampled_from(list(pki.Role)),
        start=st.integers(0, 2**40),
        span=st.integers(1, 2**30),
    )
    def test_round_trip_property(self, subject, role, start, span):
        ca, _ = pki.create_ca("propCA", 1, seed=b"\x33" * 32, depth=6, now=NOW)
        kp = crypto.sig_keygen(1, seed=b"\x44" * 32, depth=1)
        cert = pki.issue_certificate(
            ca, subject, role, 1, kp.public_key, (start, start + span)
        )
        assert pki.cert_decode(pki.cert_encode(cert)) == cert


class TestTamperEvidence:
    def test_flip_any_byte_denies(self, ca_pq):
        ca, ca_cert = ca_pq
        store = pki.TrustStore([ca_cert])
        cert = _issue(ca, "victim")
        wire = pki.cert_encode(cert)
        assert pki.verify_certificate(store, pki.cert_decode(wire), NOW + 1).allow
        rng = random.Random(1234)
        for pos in rng.sample(range(len(wire)), 100):
            flipped = bytearray(wire)
            flipped[pos] ^= 1 << rng.randrange(8)
            try:
                mutated = pki.cert_decode(bytes(flipped))
            except MalformedCertificate:
                continue  # unparseable counts as rejected
            decision = pki.verify_certificate(store, mutated, NOW + 1)
            assert not decision.allow, f"flip at {pos} still verified"


class TestFiles:
    def test_certificate_file_round_trip(self, tmp_path, ca_pq):
        ca, _ = ca_pq
        cert = _issue(ca, "filed")
        path = tmp_path / "filed.cert"
        pki.save_certificate(path, cert)
        assert "BEGIN PQC2 CERT" in path.read_text()
        assert pki.load_certificate(path) == cert

    def test_ca_round_trip_preserves_signing_state(self, tmp_path):
        ca, ca_cert = pki.create_ca("diskCA", 1, seed=b"\x55" * 32, depth=3, now=NOW)
        first = _issue(ca, "one")
        pki.save_ca(tmp_path / "ca", ca)
        reloaded = pki.load_ca(tmp_path / "ca")
        assert reloaded.certificate == ca_cert
        assert reloaded.next_serial == ca.next_serial
        second = _issue(reloaded, "two")
        assert second.serial == first.serial + 1
        # the one-time-signature index also advanced past the first issuance
        assert second.signature.ots_index > first.signature.ots_index
        store = pki.TrustStore([ca_cert])
        assert pki.verify_certificate(store, second, NOW + 1).allow
