"""Crypto suite facade.

All algorithms sit behind the scheme registry; these module-level helpers
bind the common operations to the default registry so callers can write
``crypto.sign(keypair, msg)`` without threading a registry around.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from pqc2.crypto import registry as _registry_mod
from pqc2.crypto.kdf import hkdf_expand, hkdf_extract, kdf_derive
from pqc2.crypto.merkle import merkle_root
from pqc2.crypto.registry import DEFAULT as default_registry
from pqc2.crypto.registry import SchemeRegistry, register_kem_adapter
from pqc2.crypto.types import (
    KemKeyPair,
    SchemeDescriptor,
    SchemeKind,
    SessionKeys,
    Signature,
    SignatureKeyPair,
)

__all__ = [
    "SchemeKind",
    "SchemeDescriptor",
    "SignatureKeyPair",
    "Signature",
    "KemKeyPair",
    "SessionKeys",
    "SchemeRegistry",
    "default_registry",
    "register_kem_adapter",
    "list_schemes",
    "sig_keygen",
    "sign",
    "verify",
    "kem_keygen",
    "encapsulate",
    "decapsulate",
    "aead_seal",
    "aead_open",
    "kdf_derive",
    "hkdf_extract",
    "hkdf_expand",
    "merkle_root",
]


def list_schemes() -> List[SchemeDescriptor]:
    return default_registry.list_schemes()


def sig_keygen(scheme_id: int, seed: Optional[bytes] = None, **kwargs) -> SignatureKeyPair:
    provider = default_registry.get(scheme_id, SchemeKind.SIGNATURE)
    return provider.keygen(seed=seed, **kwargs)


def sign(keypair: SignatureKeyPair, message: bytes) -> Signature:
    provider = default_registry.get(keypair.scheme_id, SchemeKind.SIGNATURE)
    return provider.sign(keypair, message)


def verify(scheme_id: int, public_key: bytes, message: bytes, signature: Signature) -> bool:
    provider = default_registry.get(scheme_id, SchemeKind.SIGNATURE)
    return provider.verify(public_key, message, signature)


def kem_keygen(scheme_id: int, seed: Optional[bytes] = None) -> KemKeyPair:
    provider = default_registry.get(scheme_id, SchemeKind.KEM)
    return provider.keygen(seed=seed)


def encapsulate(scheme_id: int, public_key: bytes) -> Tuple[bytes, bytes]:
    provider = default_registry.get(scheme_id, SchemeKind.KEM)
    return provider.encapsulate(public_key)


def decapsulate(keypair: KemKeyPair, ciphertext: bytes) -> bytes:
    provider = default_registry.get(keypair.scheme_id, SchemeKind.KEM)
    return provider.decapsulate(keypair, ciphertext)


def aead_seal(scheme_id: int, key: bytes, nonce: bytes, aad: bytes, plaintext: bytes) -> bytes:
    provider = default_registry.get(scheme_id, SchemeKind.AEAD)
    return provider.seal(key, nonce, aad, plaintext)


def aead_open(scheme_id: int, key: bytes, nonce: bytes, aad: bytes, ciphertext: bytes) -> bytes:
    provider = default_registry.get(scheme_id, SchemeKind.AEAD)
    return provider.open(key, nonce, aad, ciphertext)
