"""Certificate authority, certificates, and trust stores.

Single-level hierarchy: one self-signed CA per deployment signs end-entity
certificates; verifiers hold the CA certificate (and optional per-subject
key pins) in a TrustStore. No chains, no revocation — a compromised key
means rebuilding the store.

Binary certificate layout, big-endian:

    "PQCT" || u8 version=1
    || u16 len || subject
    || u8 role || u16 scheme_id
    || u32 len || subject_public_key
    || u64 not_before || u64 not_after || u64 serial
    || u16 len || issuer
    || u32 len || sigblob

where sigblob = u16 sig_scheme || (u16 ots_index iff sig_scheme is the
hash-based scheme) || signature bytes.  The issuer signs the domain prefix
"pqc2-cert-v1" followed by every byte before the sigblob length.
"""

from __future__ import annotations

import enum
import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pqc2.crypto import default_registry
from pqc2.crypto.keyfiles import armor, dearmor
from pqc2.crypto.types import SchemeKind, Signature, SignatureKeyPair
from pqc2.errors import (
    BadCertificate,
    EmptyName,
    InvalidWindow,
    MalformedCertificate,
)

CERT_MAGIC = b"PQCT"
CERT_VERSION = 1
_DOMAIN = b"pqc2-cert-v1"
_CERT_ARMOR = "PQC2 CERT"

DEFAULT_VALIDITY_SECONDS = 365 * 86400  # paper leaves lifetimes unstated

UNKNOWN_ISSUER = "UnknownIssuer"
BAD_SIGNATURE = "BadSignature"
EXPIRED = "Expired"
NOT_YET_VALID = "NotYetValid"
PIN_MISMATCH = "PinMismatch"


class Role(enum.IntEnum):
    GROUND_STATION = 1
    MONITOR = 2
    AGENT = 3
    RELAY = 4
    BROKER = 5
    ATTACKER = 6
    OTHER = 7

    @classmethod
    def from_name(cls, name: str) -> "Role":
        key = name.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown role {name!r}") from None


@dataclass(frozen=True)
class Certificate:
    subject: str
    role: Role
    scheme_id: int  # scheme of the subject's key
    public_key: bytes
    not_before: int
    not_after: int
    serial: int
    issuer: str
    signature: Signature
    version: int = CERT_VERSION


@dataclass(frozen=True)
class Decision:
    allow: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.allow


ALLOW = Decision(True)


@dataclass
class CaIdentity:
    name: str
    keypair: SignatureKeyPair
    certificate: Certificate
    next_serial: int = 1


class TrustStore:
    """Immutable set of trusted CA certificates plus optional key pins."""

    def __init__(self, ca_certificates, pinned_subjects: Optional[Dict[str, bytes]] = None,
                 registry=default_registry):
        self._by_issuer: Dict[str, Certificate] = {}
        for cert in ca_certificates:
            if cert.issuer != cert.subject:
                raise BadCertificate("trust anchors must be self-signed")
            if not _signature_valid(cert, cert.public_key, registry):
                raise BadCertificate("trust anchor fails self-verification")
            self._by_issuer[cert.subject] = cert
        self.pinned_subjects = dict(pinned_subjects or {})
        self._registry = registry

    @property
    def ca_certificates(self):
        return tuple(self._by_issuer.values())

    def anchor_for(self, issuer: str) -> Optional[Certificate]:
        return self._by_issuer.get(issuer)


def _tbs(subject: bytes, role: int, scheme_id: int, public_key: bytes,
         not_before: int, not_after: int, serial: int, issuer: bytes,
         version: int = CERT_VERSION) -> bytes:
    return b"".join(
        (
            CERT_MAGIC,
            struct.pack(">B", version),
            struct.pack(">H", len(subject)),
            subject,
            struct.pack(">BH", role, scheme_id),
            struct.pack(">I", len(public_key)),
            public_key,
            struct.pack(">QQQ", not_before, not_after, serial),
            struct.pack(">H", len(issuer)),
            issuer,
        )
    )


def _cert_tbs(cert: Certificate) -> bytes:
    return _tbs(
        cert.subject.encode(),
        int(cert.role),
        cert.scheme_id,
        cert.public_key,
        cert.not_before,
        cert.not_after,
        cert.serial,
        cert.issuer.encode(),
        cert.version,
    )


def _encode_sigblob(sig: Signature) -> bytes:
    head = struct.pack(">H", sig.scheme_id)
    if sig.ots_index is not None:
        head += struct.pack(">H", sig.ots_index)
    return head + sig.data


def cert_encode(cert: Certificate) -> bytes:
    blob = _encode_sigblob(cert.signature)
    return _cert_tbs(cert) + struct.pack(">I", len(blob)) + blob


def cert_decode(data: bytes) -> Certificate:
    try:
        if data[:4] != CERT_MAGIC:
            raise MalformedCertificate("bad magic")
        off = 4
        version = data[off]
        off += 1
        if version != CERT_VERSION:
            raise MalformedCertificate(f"unsupported version {version}")
        (subject_len,) = struct.unpack_from(">H", data, off)
        off += 2
        subject = data[off : off + subject_len]
        if len(subject) != subject_len:
            raise MalformedCertificate("subject truncated")
        off += subject_len
        role_code, scheme_id = struct.unpack_from(">BH", data, off)
        off += 3
        (key_len,) = struct.unpack_from(">I", data, off)
        off += 4
        public_key = data[off : off + key_len]
        if len(public_key) != key_len:
            raise MalformedCertificate("public key truncated")
        off += key_len
        not_before, not_after, serial = struct.unpack_from(">QQQ", data, off)
        off += 24
        (issuer_len,) = struct.unpack_from(">H", data, off)
        off += 2
        issuer = data[off : off + issuer_len]
        if len(issuer) != issuer_len:
            raise MalformedCertificate("issuer truncated")
        off += issuer_len
        (blob_len,) = struct.unpack_from(">I", data, off)
        off += 4
        blob = data[off : off + blob_len]
        if len(blob) != blob_len:
            raise MalformedCertificate("signature truncated")
        off += blob_len
        if off != len(data):
            raise MalformedCertificate("trailing bytes")
        (sig_scheme,) = struct.unpack_from(">H", blob, 0)
        sig_off = 2
        ots_index = None
        if sig_scheme == 1:
            (ots_index,) = struct.unpack_from(">H", blob, 2)
            sig_off = 4
        return Certificate(
            subject=subject.decode(),
            role=Role(role_code),
            scheme_id=scheme_id,
            public_key=public_key,
            not_before=not_before,
            not_after=not_after,
            serial=serial,
            issuer=issuer.decode(),
            signature=Signature(sig_scheme, blob[sig_off:], ots_index),
            version=version,
        )
    except MalformedCertificate:
        raise
    except Exception as exc:
        # struct.error, UnicodeDecodeError, bad role code, IndexError: all malformed
        raise MalformedCertificate(str(exc)) from exc


def _sign_cert(keypair: SignatureKeyPair, tbs: bytes, registry) -> Signature:
    provider = registry.get(keypair.scheme_id, SchemeKind.SIGNATURE)
    return provider.sign(keypair, _DOMAIN + tbs)


def _signature_valid(cert: Certificate, issuer_public_key: bytes, registry) -> bool:
    try:
        provider = registry.get(cert.signature.scheme_id, SchemeKind.SIGNATURE)
    except Exception:
        return False
    return provider.verify(issuer_public_key, _DOMAIN + _cert_tbs(cert), cert.signature)


def create_ca(name: str, scheme_id: int, registry=default_registry,
              seed: Optional[bytes] = None, now: Optional[int] = None,
              validity_seconds: int = DEFAULT_VALIDITY_SECONDS,
              **scheme_kwargs) -> Tuple[CaIdentity, Certificate]:
    if not name:
        raise EmptyName("CA name must be non-empty")
    provider = registry.get(scheme_id, SchemeKind.SIGNATURE)
    keypair = provider.keygen(seed=seed, **scheme_kwargs)
    if now is None:
        now = int(time.time())
    tbs = _tbs(
        name.encode(), int(Role.OTHER), scheme_id, keypair.public_key,
        now, now + validity_seconds, 0, name.encode(),
    )
    sig = _sign_cert(keypair, tbs, registry)
    cert = Certificate(
        subject=name,
        role=Role.OTHER,
        scheme_id=scheme_id,
        public_key=keypair.public_key,
        not_before=now,
        not_after=now + validity_seconds,
        serial=0,
        issuer=name,
        signature=sig,
    )
    return CaIdentity(name=name, keypair=keypair, certificate=cert), cert


def issue_certificate(ca: CaIdentity, subject: str, role: Role,
                      subject_scheme_id: int, subject_public_key: bytes,
                      validity: Tuple[int, int],
                      registry=default_registry) -> Certificate:
    if not subject:
        raise EmptyName("subject must be non-empty")
    not_before, not_after = validity
    if not_before >= not_after:
        raise InvalidWindow(f"empty validity window [{not_before}, {not_after}]")
    serial = ca.next_serial
    tbs = _tbs(
        subject.encode(), int(role), subject_scheme_id, subject_public_key,
        not_before, not_after, serial, ca.name.encode(),
    )
    sig = _sign_cert(ca.keypair, tbs, registry)
    ca.next_serial = serial + 1
    return Certificate(
        subject=subject,
        role=role,
        scheme_id=subject_scheme_id,
        public_key=subject_public_key,
        not_before=not_before,
        not_after=not_after,
        serial=serial,
        issuer=ca.name,
        signature=sig,
    )


def verify_certificate(trust_store: TrustStore, cert: Certificate, now: int) -> Decision:
    anchor = trust_store.anchor_for(cert.issuer)
    if anchor is None:
        return Decision(False, UNKNOWN_ISSUER)
    if not _signature_valid(cert, anchor.public_key, trust_store._registry):
        return Decision(False, BAD_SIGNATURE)
    if now < cert.not_before:
        return Decision(False, NOT_YET_VALID)
    if now > cert.not_after:
        return Decision(False, EXPIRED)
    pin = trust_store.pinned_subjects.get(cert.subject)
    if pin is not None and pin != cert.public_key:
        return Decision(False, PIN_MISMATCH)
    return ALLOW


# file plumbing shared by the CLI and the scenario runner

def save_certificate(path: Union[str, Path], cert: Certificate) -> None:
    Path(path).write_text(armor(_CERT_ARMOR, cert_encode(cert)))


def load_certificate(path: Union[str, Path]) -> Certificate:
    return cert_decode(dearmor(_CERT_ARMOR, Path(path).read_text()))


def save_ca(directory: Union[str, Path], ca: CaIdentity, registry=default_registry) -> None:
    from pqc2.crypto import keyfiles

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    keyfiles.save_secret_key(directory / "ca.key", registry, ca.keypair)
    save_certificate(directory / "ca.cert", ca.certificate)
    (directory / "ca.json").write_text(
        json.dumps({"name": ca.name, "next_serial": ca.next_serial}) + "\n"
    )


def load_ca(directory: Union[str, Path], registry=default_registry) -> CaIdentity:
    from pqc2.crypto import keyfiles

    directory = Path(directory)
    keypair = keyfiles.load_secret_key(directory / "ca.key", registry)
    cert = load_certificate(directory / "ca.cert")
    meta = json.loads((directory / "ca.json").read_text())
    return CaIdentity(
        name=meta["name"],
        keypair=keypair,
        certificate=cert,
        next_serial=int(meta["next_serial"]),
    )
