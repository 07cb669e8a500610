"""Run configuration for the command line.

Everything a long-running process needs is resolved and validated here,
before any socket is opened or file is written: a bad flag or a missing
key file must never leave a half-started node behind.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pqc2 import authz, channel, pki
from pqc2.agents.runtime import Identity
from pqc2.bus import protocol
from pqc2.crypto import default_registry, keyfiles
from pqc2.crypto.types import SignatureKeyPair
from pqc2.errors import ConfigError, Pqc2Error

LOG_LEVELS = ("error", "warn", "info", "debug")

_SUITE_ALIASES = {
    "pq": channel.SUITE_PQ,
    "classical": channel.SUITE_CLASSICAL,
}


@dataclass
class RunConfig:
    subject: str
    mode: str = protocol.MODE_NONE
    broker_host: str = "127.0.0.1"
    broker_port: int = 7700
    cert_path: Optional[str] = None
    key_path: Optional[str] = None
    ca_path: Optional[str] = None
    peers_dir: Optional[str] = None
    authz_path: Optional[str] = None
    suites: List[channel.CipherSuite] = field(default_factory=list)
    capture_path: Optional[str] = None
    console_port: Optional[int] = None
    log_level: str = "warn"

    # resolved at load time; None until load_run_config ran
    certificate: Optional[pki.Certificate] = None
    keypair: Optional[SignatureKeyPair] = None
    trust_store: Optional[pki.TrustStore] = None
    peer_certs: Dict[str, pki.Certificate] = field(default_factory=dict)
    policy: Optional[authz.AuthzPolicy] = None

    def identity(self) -> Identity:
        return Identity(subject=self.subject, keypair=self.keypair,
                        certificate=self.certificate, trust_store=self.trust_store,
                        peer_certs=dict(self.peer_certs))

    def channel_config(self) -> Optional[channel.ChannelConfig]:
        if not self.suites:
            return None
        return channel.ChannelConfig(suites=list(self.suites))


def parse_address(text: str) -> Tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"address {text!r} must look like HOST:PORT")
    try:
        port_no = int(port)
    except ValueError:
        raise ConfigError(f"port in {text!r} is not a number")
    if not 0 <= port_no <= 65535:
        raise ConfigError(f"port {port_no} out of range")
    return host, port_no


def parse_suite(token: str, registry=default_registry) -> channel.CipherSuite:
    """'pq', 'classical', or an explicit 'sig+kem+aead' triple of scheme names."""
    alias = _SUITE_ALIASES.get(token.lower())
    if alias is not None:
        return alias
    parts = token.split("+")
    if len(parts) != 3:
        raise ConfigError(
            f"suite {token!r}: expected 'pq', 'classical', or SIG+KEM+AEAD names")
    try:
        ids = [registry.by_name(p).descriptor.scheme_id for p in parts]
    except Pqc2Error as exc:
        raise ConfigError(f"suite {token!r}: {exc}")
    try:
        return channel.CipherSuite(*ids).validate(registry)
    except Pqc2Error as exc:
        raise ConfigError(f"suite {token!r}: {exc}")


def check_log_level(level: str) -> str:
    if level not in LOG_LEVELS:
        raise ConfigError(f"log level {level!r}; expected one of {LOG_LEVELS}")
    return level


def configure_logging(level: Optional[str]) -> str:
    level = check_log_level(level or os.environ.get("PQC2_LOG", "warn"))
    numeric = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}[level]
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return level


def _require_file(path: str, what: str) -> str:
    if not os.path.isfile(path):
        raise ConfigError(f"{what} {path!r} does not exist")
    return path


def load_run_config(subject: str,
                    mode: str = protocol.MODE_NONE,
                    broker: str = "127.0.0.1:7700",
                    cert: Optional[str] = None,
                    key: Optional[str] = None,
                    ca: Optional[str] = None,
                    peers: Optional[str] = None,
                    authz_path: Optional[str] = None,
                    suites: Optional[List[str]] = None,
                    capture: Optional[str] = None,
                    console_port: Optional[int] = None,
                    log_level: Optional[str] = None,
                    registry=default_registry) -> RunConfig:
    """Build and fully validate a RunConfig; raises ConfigError on anything
    wrong, with one line per cause. No side effects."""
    problems: List[str] = []
    cfg = RunConfig(subject=subject)
    if not subject:
        problems.append("subject must be non-empty")
    try:
        cfg.mode = protocol.check_mode(mode)
    except ConfigError as exc:
        problems.append(str(exc))
    try:
        cfg.broker_host, cfg.broker_port = parse_address(broker)
    except ConfigError as exc:
        problems.append(str(exc))
    cfg.log_level = log_level or os.environ.get("PQC2_LOG", "warn")
    try:
        check_log_level(cfg.log_level)
    except ConfigError as exc:
        problems.append(str(exc))

    needs_key = protocol.mode_signs_envelopes(cfg.mode) or \
        protocol.mode_uses_channel(cfg.mode)
    for name, path, required in (
        ("certificate", cert, needs_key),
        ("secret key", key, needs_key),
        ("trust anchor", ca, needs_key),
    ):
        if path is None and required:
            problems.append(f"mode {cfg.mode!r} requires a {name} file")

    if cert is not None:
        try:
            cfg.certificate = pki.load_certificate(_require_file(cert, "certificate"))
            cfg.cert_path = cert
        except (Pqc2Error, ConfigError, OSError, ValueError) as exc:
            problems.append(f"certificate: {exc}")
    if key is not None:
        try:
            cfg.keypair = keyfiles.load_secret_key(
                _require_file(key, "secret key"), registry)
            cfg.key_path = key
        except (Pqc2Error, ConfigError, OSError, ValueError) as exc:
            problems.append(f"secret key: {exc}")
    if ca is not None:
        try:
            anchor = pki.load_certificate(_require_file(ca, "trust anchor"))
            cfg.trust_store = pki.TrustStore([anchor])
            cfg.ca_path = ca
        except (Pqc2Error, ConfigError, OSError, ValueError) as exc:
            problems.append(f"trust anchor: {exc}")
    if peers is not None:
        if not os.path.isdir(peers):
            problems.append(f"peer certificate directory {peers!r} does not exist")
        else:
            cfg.peers_dir = peers
            for entry in sorted(os.listdir(peers)):
                if not entry.endswith(".cert"):
                    continue
                try:
                    peer = pki.load_certificate(os.path.join(peers, entry))
                    cfg.peer_certs[peer.subject] = peer
                except (Pqc2Error, OSError, ValueError) as exc:
                    problems.append(f"peer certificate {entry}: {exc}")
    if cfg.certificate is not None:
        cfg.peer_certs.setdefault(cfg.certificate.subject, cfg.certificate)

    if authz_path is not None:
        try:
            cfg.policy = authz.policy_load_file(_require_file(authz_path, "authz policy"))
            cfg.authz_path = authz_path
        except (Pqc2Error, ConfigError, OSError, ValueError) as exc:
            problems.append(f"authz policy: {exc}")

    for token in suites or []:
        try:
            cfg.suites.append(parse_suite(token, registry))
        except ConfigError as exc:
            problems.append(str(exc))

    if capture is not None:
        parent = os.path.dirname(os.path.abspath(capture)) or "."
        if not os.path.isdir(parent):
            problems.append(f"capture directory {parent!r} does not exist")
        else:
            cfg.capture_path = capture

    if console_port is not None:
        if not 1 <= console_port <= 65535:
            problems.append(f"console port {console_port} out of range")
        else:
            cfg.console_port = console_port

    if cfg.certificate is not None and cfg.certificate.subject != subject:
        problems.append(
            f"certificate subject {cfg.certificate.subject!r} does not match "
            f"--subject {subject!r}")

    if problems:
        raise ConfigError("; ".join(problems))
    return cfg
