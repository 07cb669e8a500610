"""AEAD ciphers: AES-256-GCM (scheme 16, default) and ChaCha20-Poly1305
(scheme 17, for platforms without AES acceleration).

Nonce construction belongs to the channel layer; this module only enforces
the 32-byte key / 12-byte nonce contract and authenticates aad+ciphertext.
"""

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM, ChaCha20Poly1305

from pqc2.crypto.types import SchemeDescriptor, SchemeKind
from pqc2.errors import AuthenticationFailure

AES_GCM_SCHEME_ID = 16
CHACHA_SCHEME_ID = 17

KEY_LEN = 32
NONCE_LEN = 12


class _Aead:
    _cipher = None  # subclass provides

    def _check(self, key: bytes, nonce: bytes):
        if len(key) != KEY_LEN:
            raise ValueError(f"key must be {KEY_LEN} bytes, got {len(key)}")
        if len(nonce) != NONCE_LEN:
            raise ValueError(f"nonce must be {NONCE_LEN} bytes, got {len(nonce)}")

    def seal(self, key: bytes, nonce: bytes, aad: bytes, plaintext: bytes) -> bytes:
        self._check(key, nonce)
        return self._cipher(key).encrypt(nonce, plaintext, aad)

    def open(self, key: bytes, nonce: bytes, aad: bytes, ciphertext: bytes) -> bytes:
        self._check(key, nonce)
        try:
            return self._cipher(key).decrypt(nonce, ciphertext, aad)
        except InvalidTag as exc:
            raise AuthenticationFailure("AEAD tag mismatch") from exc


class AesGcm(_Aead):
    descriptor = SchemeDescriptor(
        scheme_id=AES_GCM_SCHEME_ID,
        kind=SchemeKind.AEAD,
        name="aes-256-gcm",
        post_quantum=True,  # symmetric with 256-bit keys keeps its margin under Grover
    )
    _cipher = AESGCM


class ChaCha20(_Aead):
    descriptor = SchemeDescriptor(
        scheme_id=CHACHA_SCHEME_ID,
        kind=SchemeKind.AEAD,
        name="chacha20-poly1305",
        post_quantum=True,
    )
    _cipher = ChaCha20Poly1305
