"""Classical baseline schemes, delegated to the cryptography package.

RSA-2048 (scheme 2) exists to benchmark the hash-based scheme against the
traditional choice; X25519 (scheme 3) is the classical KEM used for channel
key exchange. Neither is post-quantum and both say so in their descriptors.
"""

from __future__ import annotations

from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)

from pqc2.crypto import kdf
from pqc2.crypto.types import (
    KemKeyPair,
    SchemeDescriptor,
    SchemeKind,
    Signature,
    SignatureKeyPair,
)
from pqc2.errors import DecapsulationFailure, MalformedKey, SeedUnsupported

RSA_SCHEME_ID = 2
X25519_SCHEME_ID = 3


class RsaSignature:
    descriptor = SchemeDescriptor(
        scheme_id=RSA_SCHEME_ID,
        kind=SchemeKind.SIGNATURE,
        name="rsa-2048",
        post_quantum=False,
        pubkey_len=0,   # DER, length varies by a few bytes
        sig_or_ct_len=256,
    )

    def keygen(self, seed: bytes | None = None) -> SignatureKeyPair:
        if seed is not None:
            raise SeedUnsupported("rsa-2048 key generation cannot be seeded")
        private = rsa.generate_private_key(public_exponent=65537, key_size=2048)
        return self._wrap(private)

    def _wrap(self, private) -> SignatureKeyPair:
        public_der = private.public_key().public_bytes(
            serialization.Encoding.DER,
            serialization.PublicFormat.SubjectPublicKeyInfo,
        )
        secret_der = private.private_bytes(
            serialization.Encoding.DER,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )
        return SignatureKeyPair(
            scheme_id=RSA_SCHEME_ID,
            public_key=public_der,
            secret_key=secret_der,
            remaining_uses=None,
            _state=private,
        )

    def sign(self, keypair: SignatureKeyPair, message: bytes) -> Signature:
        private = keypair._state
        if private is None:
            private = serialization.load_der_private_key(keypair.secret_key, password=None)
            keypair._state = private
        sig = private.sign(message, padding.PKCS1v15(), hashes.SHA256())
        return Signature(RSA_SCHEME_ID, sig)

    def verify(self, public_key: bytes, message: bytes, signature: Signature) -> bool:
        if signature.scheme_id != RSA_SCHEME_ID:
            return False
        try:
            pub = serialization.load_der_public_key(public_key)
            pub.verify(signature.data, message, padding.PKCS1v15(), hashes.SHA256())
            return True
        except Exception:
            # total on arbitrary bytes: unparseable keys, wrong key types,
            # and InvalidSignature all mean "not valid"
            return False

    def secret_material(self, keypair: SignatureKeyPair) -> bytes:
        return keypair.secret_key

    def load_keypair(self, material: bytes) -> SignatureKeyPair:
        try:
            private = serialization.load_der_private_key(material, password=None)
        except (ValueError, TypeError) as exc:
            raise MalformedKey(f"rsa-2048 secret key does not parse: {exc}") from exc
        return self._wrap(private)


class X25519Kem:
    """DH-based KEM: the ciphertext is an ephemeral public key and the
    shared secret is the HKDF of the raw exchange bound to both keys."""

    descriptor = SchemeDescriptor(
        scheme_id=X25519_SCHEME_ID,
        kind=SchemeKind.KEM,
        name="x25519",
        post_quantum=False,
        pubkey_len=32,
        sig_or_ct_len=32,
    )

    @staticmethod
    def _derive(raw: bytes, ciphertext: bytes, recipient_pub: bytes) -> bytes:
        prk = kdf.hkdf_extract(b"pqc2-kem-x25519", raw)
        return kdf.hkdf_expand(prk, ciphertext + recipient_pub, 32)

    def keygen(self, seed: bytes | None = None) -> KemKeyPair:
        if seed is None:
            private = X25519PrivateKey.generate()
        else:
            if len(seed) != 32:
                raise ValueError(f"seed must be 32 bytes, got {len(seed)}")
            # an x25519 secret is 32 bytes (clamped on use), so a seed maps directly
            private = X25519PrivateKey.from_private_bytes(seed)
        return KemKeyPair(
            scheme_id=X25519_SCHEME_ID,
            public_key=private.public_key().public_bytes_raw(),
            secret_key=private.private_bytes_raw(),
            _state=private,
        )

    def encapsulate(self, public_key: bytes):
        try:
            peer = X25519PublicKey.from_public_bytes(public_key)
        except (ValueError, TypeError) as exc:
            raise DecapsulationFailure(f"bad recipient key: {exc}") from exc
        ephemeral = X25519PrivateKey.generate()
        raw = ephemeral.exchange(peer)
        ciphertext = ephemeral.public_key().public_bytes_raw()
        return ciphertext, self._derive(raw, ciphertext, public_key)

    def decapsulate(self, keypair: KemKeyPair, ciphertext: bytes) -> bytes:
        private = keypair._state
        if private is None:
            private = X25519PrivateKey.from_private_bytes(keypair.secret_key)
            keypair._state = private
        try:
            raw = private.exchange(X25519PublicKey.from_public_bytes(ciphertext))
        except (ValueError, TypeError) as exc:
            raise DecapsulationFailure(f"ciphertext rejected: {exc}") from exc
        return self._derive(raw, ciphertext, keypair.public_key)

    def secret_material(self, keypair: KemKeyPair) -> bytes:
        return keypair.secret_key

    def load_keypair(self, material: bytes) -> KemKeyPair:
        try:
            private = X25519PrivateKey.from_private_bytes(material)
        except (ValueError, TypeError) as exc:
            raise MalformedKey(f"x25519 secret key does not parse: {exc}") from exc
        return KemKeyPair(
            scheme_id=X25519_SCHEME_ID,
            public_key=private.public_key().public_bytes_raw(),
            secret_key=material,
            _state=private,
        )
