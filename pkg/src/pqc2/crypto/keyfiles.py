"""Key serialization.

Binary layout, big-endian throughout:

    magic(4) || u16 scheme_id || u32 length || material

Magic is ``PQK1`` for secret keys and ``PQP1`` for public keys.  The material
field is scheme-defined: providers expose ``secret_material``/``load_keypair``
for secrets, and public keys are stored verbatim.  On disk the binary blob is
wrapped in a PEM-style base64 armor so files survive copy-paste.
"""

from __future__ import annotations

import base64
import struct
from pathlib import Path
from typing import Tuple, Union

from pqc2.crypto.types import SignatureKeyPair
from pqc2.errors import MalformedKey

SECRET_MAGIC = b"PQK1"
PUBLIC_MAGIC = b"PQP1"

_KEY_ARMOR = "PQC2 KEY"
_HEADER = struct.Struct(">4sHI")


def encode_key_blob(magic: bytes, scheme_id: int, material: bytes) -> bytes:
    return _HEADER.pack(magic, scheme_id, len(material)) + material


def decode_key_blob(blob: bytes, expect_magic: bytes) -> Tuple[int, bytes]:
    if len(blob) < _HEADER.size:
        raise MalformedKey("key blob truncated")
    magic, scheme_id, length = _HEADER.unpack_from(blob)
    if magic != expect_magic:
        raise MalformedKey(f"bad magic {magic!r}, expected {expect_magic!r}")
    material = blob[_HEADER.size:]
    if len(material) != length:
        raise MalformedKey(f"material length {len(material)} != declared {length}")
    return scheme_id, material


def armor(label: str, blob: bytes) -> str:
    body = base64.b64encode(blob).decode("ascii")
    lines = [body[i : i + 64] for i in range(0, len(body), 64)]
    return "\n".join(
        [f"-----BEGIN {label}-----", *lines, f"-----END {label}-----", ""]
    )


def dearmor(label: str, text: str) -> bytes:
    begin = f"-----BEGIN {label}-----"
    end = f"-----END {label}-----"
    lines = [ln.strip() for ln in text.splitlines()]
    try:
        lo = lines.index(begin)
        hi = lines.index(end)
    except ValueError:
        raise MalformedKey(f"missing {label} armor") from None
    body = "".join(lines[lo + 1 : hi])
    try:
        return base64.b64decode(body, validate=True)
    except Exception as exc:
        raise MalformedKey("bad base64 in armored block") from exc


def save_secret_key(path: Union[str, Path], registry, keypair: SignatureKeyPair) -> None:
    provider = registry.get(keypair.scheme_id)
    material = provider.secret_material(keypair)
    blob = encode_key_blob(SECRET_MAGIC, keypair.scheme_id, material)
    Path(path).write_text(armor(_KEY_ARMOR, blob))


def load_secret_key(path: Union[str, Path], registry) -> SignatureKeyPair:
    blob = dearmor(_KEY_ARMOR, Path(path).read_text())
    scheme_id, material = decode_key_blob(blob, SECRET_MAGIC)
    provider = registry.get(scheme_id)
    return provider.load_keypair(material)


def save_public_key(path: Union[str, Path], scheme_id: int, public_key: bytes) -> None:
    blob = encode_key_blob(PUBLIC_MAGIC, scheme_id, public_key)
    Path(path).write_text(armor(_KEY_ARMOR, blob))


def load_public_key(path: Union[str, Path]) -> Tuple[int, bytes]:
    blob = dearmor(_KEY_ARMOR, Path(path).read_text())
    return decode_key_blob(blob, PUBLIC_MAGIC)
