"""Shared crypto value types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class SchemeKind(enum.Enum):
    SIGNATURE = "signature"
    KEM = "kem"
    AEAD = "aead"


@dataclass(frozen=True)
class SchemeDescriptor:
    scheme_id: int
    kind: SchemeKind
    name: str
    post_quantum: bool
    pubkey_len: int = 0      # 0 = variable
    sig_or_ct_len: int = 0   # 0 = variable


@dataclass
class SignatureKeyPair:
    """Key material plus scheme-private runtime state.

    ``secret_key`` is the persistable encoding (see keyfiles); ``_state``
    holds caches such as the Merkle node levels and is rebuilt on load.
    ``remaining_uses`` is None for schemes without a signing budget.
    """

    scheme_id: int
    public_key: bytes
    secret_key: bytes
    remaining_uses: int | None = None
    _state: object = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Signature:
    scheme_id: int
    data: bytes
    ots_index: int | None = None


@dataclass
class KemKeyPair:
    scheme_id: int
    public_key: bytes
    secret_key: bytes
    _state: object = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SessionKeys:
    """Directional AEAD keys and base IVs for one channel session."""

    c2s_key: bytes
    s2c_key: bytes
    c2s_iv: bytes
    s2c_iv: bytes
