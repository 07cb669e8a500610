"""HKDF-SHA-256 (RFC 5869) with context labels."""

import hashlib
import hmac

from pqc2.errors import LengthTooLarge

HASH_LEN = 32
MAX_OUTPUT = 255 * HASH_LEN  # 8160 bytes, the RFC 5869 expand limit

_DERIVE_SALT = b"pqc2-kdf-v1"


def hkdf_extract(salt: bytes, ikm: bytes) -> bytes:
    if not salt:
        salt = b"\x00" * HASH_LEN
    return hmac.new(salt, ikm, hashlib.sha256).digest()


def hkdf_expand(prk: bytes, info: bytes, length: int) -> bytes:
    if length > MAX_OUTPUT:
        raise LengthTooLarge(f"requested {length} bytes, HKDF-SHA-256 caps at {MAX_OUTPUT}")
    out = b""
    block = b""
    counter = 1
    while len(out) < length:
        block = hmac.new(prk, block + info + bytes([counter]), hashlib.sha256).digest()
        out += block
        counter += 1
    return out[:length]


def kdf_derive(secret: bytes, label: str, length: int) -> bytes:
    """Deterministic labeled derivation; distinct labels give independent outputs."""
    prk = hkdf_extract(_DERIVE_SALT, secret)
    return hkdf_expand(prk, label.encode(), length)
