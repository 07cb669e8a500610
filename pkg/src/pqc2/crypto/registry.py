"""Scheme registry.

Every algorithm is a numbered provider behind a small uniform interface so
upper layers never name a cipher directly.  Scheme ids are wire-visible
(envelopes, certificates, key files) and must stay stable:

    1   hash-merkle          signature, post-quantum
    2   rsa-2048             signature, classical baseline
    3   x25519               KEM, classical baseline
    4   (reserved)           KEM adapter slot for an external PQ library
    16  aes-256-gcm          AEAD
    17  chacha20-poly1305    AEAD

Slot 4 ships unregistered; `register_kem_adapter` lets a deployment plug a
library-backed KEM in without touching this module.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from pqc2.crypto import aead, classical, hashsig
from pqc2.crypto.types import SchemeDescriptor, SchemeKind
from pqc2.errors import ConfigError, UnknownScheme

PQ_KEM_ADAPTER_SCHEME_ID = 4


class SchemeRegistry:
    """Maps scheme ids to providers; ids are unique across all kinds."""

    def __init__(self):
        self._providers: Dict[int, object] = {}

    def register(self, provider) -> None:
        desc = provider.descriptor
        if desc.scheme_id in self._providers:
            raise ConfigError(f"scheme id {desc.scheme_id} already registered")
        self._providers[desc.scheme_id] = provider

    def get(self, scheme_id: int, kind: Optional[SchemeKind] = None):
        provider = self._providers.get(scheme_id)
        if provider is None:
            raise UnknownScheme(scheme_id)
        if kind is not None and provider.descriptor.kind is not kind:
            raise UnknownScheme(scheme_id)
        return provider

    def descriptor(self, scheme_id: int) -> SchemeDescriptor:
        return self.get(scheme_id).descriptor

    def by_name(self, name: str, kind: Optional[SchemeKind] = None):
        for provider in self._providers.values():
            desc = provider.descriptor
            if desc.name == name and (kind is None or desc.kind is kind):
                return provider
        raise ConfigError(f"no scheme named {name!r}")

    def list_schemes(self) -> List[SchemeDescriptor]:
        return [self._providers[i].descriptor for i in sorted(self._providers)]

    def signature_schemes(self) -> List[SchemeDescriptor]:
        return [d for d in self.list_schemes() if d.kind is SchemeKind.SIGNATURE]

    def kem_schemes(self) -> List[SchemeDescriptor]:
        return [d for d in self.list_schemes() if d.kind is SchemeKind.KEM]

    def aead_schemes(self) -> List[SchemeDescriptor]:
        return [d for d in self.list_schemes() if d.kind is SchemeKind.AEAD]


def _build_default() -> SchemeRegistry:
    reg = SchemeRegistry()
    reg.register(hashsig.HashMerkleSignature())
    reg.register(classical.RsaSignature())
    reg.register(classical.X25519Kem())
    reg.register(aead.AesGcm())
    reg.register(aead.ChaCha20())
    return reg


DEFAULT = _build_default()


def register_kem_adapter(provider, registry: SchemeRegistry = DEFAULT) -> None:
    """Install an external post-quantum KEM into the reserved slot."""
    desc = provider.descriptor
    if desc.scheme_id != PQ_KEM_ADAPTER_SCHEME_ID:
        raise ConfigError(
            f"adapter must claim scheme id {PQ_KEM_ADAPTER_SCHEME_ID}, got {desc.scheme_id}"
        )
    if desc.kind is not SchemeKind.KEM:
        raise ConfigError("adapter slot is reserved for a KEM")
    registry.register(provider)
