"""Built-in post-quantum signature scheme (id 1): Lamport one-time
signatures under a Merkle tree.

Each of the 2^depth leaves is one Lamport keypair: 256 bit positions times
two 32-byte secret preimages, all derived deterministically from a 32-byte
seed (derivation rules in pqc2.kernels._pure). The public key is the
32-byte Merkle root. A signature spends one leaf and carries:

    reveals     256 x 32 B   secret for each digest bit
    complements 256 x 32 B   public hash for each unrevealed preimage
    auth path   depth x 32 B sibling hashes up to the root

plus the leaf index, carried next to the signature bytes on every wire
format. The complements are what let a verifier rebuild the full leaf hash
from a one-sided reveal; without them the Merkle root could not be checked.

Verification is total: malformed input of any shape returns False.
"""

from __future__ import annotations

import hmac
import os
import struct
import threading

from pqc2 import kernels
from pqc2.crypto import merkle
from pqc2.crypto.types import SchemeDescriptor, SchemeKind, Signature, SignatureKeyPair
from pqc2.errors import KeyExhausted, MalformedKey

SCHEME_ID = 1
DEFAULT_DEPTH = 10
MAX_DEPTH = 16  # leaf index travels as u16

SECRET_LEN = 32 + 1 + 4  # seed || depth || next_index


class _MerkleState:
    """Cached tree plus the index allocator. The lock makes index
    allocation atomic; a leaf can never be spent twice."""

    def __init__(self, seed: bytes, depth: int, levels: list, next_index: int):
        self.seed = seed
        self.depth = depth
        self.levels = levels
        self.next_index = next_index
        self.lock = threading.Lock()


def signature_length(depth: int) -> int:
    return kernels.OPENED_LEN + depth * 32


def _encode_secret(seed: bytes, depth: int, next_index: int) -> bytes:
    return seed + struct.pack(">BI", depth, next_index)


def _decode_secret(material: bytes):
    if len(material) != SECRET_LEN:
        raise MalformedKey("hash-merkle secret key must be 37 bytes")
    depth, next_index = struct.unpack(">BI", material[32:])
    if not 1 <= depth <= MAX_DEPTH:
        raise MalformedKey(f"depth {depth} out of range 1..{MAX_DEPTH}")
    if next_index > (1 << depth):
        raise MalformedKey("next index past key capacity")
    return material[:32], depth, next_index


class HashMerkleSignature:
    descriptor = SchemeDescriptor(
        scheme_id=SCHEME_ID,
        kind=SchemeKind.SIGNATURE,
        name="hash-merkle",
        post_quantum=True,
        pubkey_len=32,
        sig_or_ct_len=0,  # depends on depth
    )

    def keygen(self, seed: bytes | None = None, depth: int = DEFAULT_DEPTH) -> SignatureKeyPair:
        if not 1 <= depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 1..{MAX_DEPTH}, got {depth}")
        if seed is None:
            seed = os.urandom(32)
        elif len(seed) != 32:
            raise ValueError("seed must be exactly 32 bytes")
        return self._build(seed, depth, next_index=0)

    def _build(self, seed: bytes, depth: int, next_index: int) -> SignatureKeyPair:
        leaves = kernels.ots_leaf_hashes(seed, 0, 1 << depth)
        levels = merkle.build_levels(leaves)
        state = _MerkleState(seed, depth, levels, next_index)
        return SignatureKeyPair(
            scheme_id=SCHEME_ID,
            public_key=levels[-1],
            secret_key=_encode_secret(seed, depth, next_index),
            remaining_uses=(1 << depth) - next_index,
            _state=state,
        )

    def sign(self, keypair: SignatureKeyPair, message: bytes) -> Signature:
        state: _MerkleState = keypair._state
        with state.lock:
            index = state.next_index
            if index >= (1 << state.depth):
                raise KeyExhausted(f"all {1 << state.depth} one-time leaves spent")
            state.next_index = index + 1
            keypair.remaining_uses = (1 << state.depth) - state.next_index
            keypair.secret_key = _encode_secret(state.seed, state.depth, state.next_index)
        digest = kernels.sha256(message)
        opened = kernels.ots_reveal(state.seed, index, digest)
        path = merkle.auth_path(state.levels, index)
        return Signature(SCHEME_ID, opened + b"".join(path), ots_index=index)

    def verify(self, public_key: bytes, message: bytes, signature: Signature) -> bool:
        try:
            if signature.scheme_id != SCHEME_ID or signature.ots_index is None:
                return False
            index = signature.ots_index
            data = signature.data
            extra = len(data) - kernels.OPENED_LEN
            if extra < 0 or extra % 32 != 0:
                return False
            depth = extra // 32
            if depth > MAX_DEPTH or not 0 <= index < (1 << depth):
                return False
            if len(public_key) != 32:
                return False
            digest = kernels.sha256(message)
            leaf = kernels.ots_leaf_from_reveal(digest, data[:kernels.OPENED_LEN])
            path = [
                data[kernels.OPENED_LEN + k * 32:kernels.OPENED_LEN + (k + 1) * 32]
                for k in range(depth)
            ]
            return hmac.compare_digest(merkle.climb(leaf, index, path), public_key)
        except Exception:
            return False

    # key file support

    def secret_material(self, keypair: SignatureKeyPair) -> bytes:
        return keypair.secret_key

    def load_keypair(self, material: bytes) -> SignatureKeyPair:
        seed, depth, next_index = _decode_secret(material)
        return self._build(seed, depth, next_index)
