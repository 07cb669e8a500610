"""Exception taxonomy shared across the package.

Errors that callers are expected to branch on get their own class; purely
diagnostic failures reuse the closest parent. Reject-style outcomes that are
part of normal operation (certificate verification, authorization checks,
anti-replay) are returned as decision values, not raised.
"""


class Pqc2Error(Exception):
    """Base class for every error raised by this package."""


class ConfigError(Pqc2Error):
    """Invalid configuration detected before any side effect."""


# crypto registry / schemes

class UnknownScheme(Pqc2Error):
    def __init__(self, scheme_id):
        super().__init__(f"unknown or unregistered scheme: {scheme_id!r}")
        self.scheme_id = scheme_id


class SeedUnsupported(Pqc2Error):
    """The scheme cannot honor deterministic keygen from a seed."""


class KeyExhausted(Pqc2Error):
    """All one-time signature indices of a hash-based key are spent."""


class DecapsulationFailure(Pqc2Error):
    pass


class AuthenticationFailure(Pqc2Error):
    """AEAD open failed: key, nonce, AAD, or ciphertext do not match."""


class LengthTooLarge(Pqc2Error):
    pass


class BadLeafCount(Pqc2Error):
    pass


class MalformedKey(Pqc2Error):
    """Key file bytes do not parse."""


# pki

class EmptyName(Pqc2Error):
    pass


class InvalidWindow(Pqc2Error):
    """Certificate validity window is empty or inverted."""


class MalformedCertificate(Pqc2Error):
    pass


# envelope

class FieldTooLong(Pqc2Error):
    pass


class MalformedEnvelope(Pqc2Error):
    pass


class EnvelopeRejected(Pqc2Error):
    """Verification pipeline dropped an envelope; .reason is one of the
    RejectReason values and feeds the security-event log."""

    def __init__(self, reason, detail=""):
        super().__init__(f"envelope rejected: {reason}" + (f" ({detail})" if detail else ""))
        self.reason = reason
        self.detail = detail


# secure channel

class NoCommonSuite(Pqc2Error):
    pass


class BadCertificate(Pqc2Error):
    def __init__(self, reason):
        super().__init__(f"peer certificate rejected: {reason}")
        self.reason = reason


class BadTranscriptSignature(Pqc2Error):
    pass


class ProtocolViolation(Pqc2Error):
    """Out-of-order or malformed handshake frame."""


class CounterExhausted(Pqc2Error):
    pass


class FrameRejected(Pqc2Error):
    """A DATA frame failed replay or authentication checks; .reason is
    'Replay' or 'AuthenticationFailure'."""

    def __init__(self, reason, detail=""):
        super().__init__(f"frame rejected: {reason}" + (f" ({detail})" if detail else ""))
        self.reason = reason


class ChannelAlert(Pqc2Error):
    """Peer sent an ALERT frame; .code is the one-byte reason."""

    def __init__(self, code):
        super().__init__(f"peer alert: code {code}")
        self.code = code


# authz

class PolicyError(Pqc2Error):
    pass


class ParseError(PolicyError):
    def __init__(self, message, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line


class DuplicateTopic(PolicyError):
    def __init__(self, topic):
        super().__init__(f"topic declared twice: {topic}")
        self.topic = topic


# bus

class BindFailure(Pqc2Error):
    pass


class NotAuthorized(Pqc2Error):
    """Registration refused: a declared topic failed the authz check."""

    def __init__(self, denied):
        super().__init__(f"registration denied: {denied}")
        self.denied = denied


class ConnectionLost(Pqc2Error):
    pass


class NotDeclared(Pqc2Error):
    def __init__(self, topic):
        super().__init__(f"topic was not declared at registration: {topic}")
        self.topic = topic


class MalformedCapture(Pqc2Error):
    pass


# agents / scenarios / bench

class ScenarioSetupFailure(Pqc2Error):
    pass


class BadConfig(ConfigError):
    pass


class SetupFailure(Pqc2Error):
    pass


class HandshakeFailed(Pqc2Error):
    pass


class EmptyInput(Pqc2Error):
    pass


class AuditFailure(Pqc2Error):
    """A correctness check failed inside a benchmark; timings are void."""
