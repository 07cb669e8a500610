"""Pure-Python hash kernels.

Reference backend for the compiled core in ``_core.pyx``; both expose the
same five functions and must produce identical bytes. All derivations below
are normative for the built-in hash-based signature scheme:

  secret(i, j, b) = SHA256(seed || "ots" || u32be(i) || u16be(j) || u8(b))
  pub(i, j, b)    = SHA256(secret(i, j, b))
  leaf(i)         = SHA256(pub(i,0,0) || pub(i,0,1) || ... || pub(i,255,1))
  parent(l, r)    = SHA256(l || r)

Message digest bits are taken MSB-first: bit j of digest d is
(d[j >> 3] >> (7 - (j & 7))) & 1.
"""

import hashlib
import struct

BACKEND = "python"

BITS = 256
VALUE_LEN = 32
REVEAL_LEN = BITS * VALUE_LEN  # one 32-byte value per digest bit
OPENED_LEN = 2 * REVEAL_LEN    # reveals then complement publics


def sha256(data):
    return hashlib.sha256(data).digest()


def hash_tree_level(nodes):
    """Hash 2n concatenated 32-byte nodes pairwise into n parents."""
    if len(nodes) % 64 != 0 or not nodes:
        raise ValueError("node buffer must hold an even number of 32-byte nodes")
    out = bytearray()
    for off in range(0, len(nodes), 64):
        out += hashlib.sha256(nodes[off:off + 64]).digest()
    return bytes(out)


def _check_seed(seed):
    # a wrong-length seed would silently change the derivation domain
    if len(seed) != 32:
        raise ValueError("seed must be 32 bytes")


def _leaf_pubs(seed, index):
    pubs = bytearray()
    prefix = seed + b"ots"
    for j in range(BITS):
        for b in (0, 1):
            secret = hashlib.sha256(prefix + struct.pack(">IHB", index, j, b)).digest()
            pubs += hashlib.sha256(secret).digest()
    return bytes(pubs)


def ots_leaf_hashes(seed, start, count):
    """Leaf hashes for indices [start, start+count), concatenated."""
    _check_seed(seed)
    out = bytearray()
    for i in range(start, start + count):
        out += hashlib.sha256(_leaf_pubs(seed, i)).digest()
    return bytes(out)


def ots_reveal(seed, index, digest):
    """OTS opening for one leaf: 256 revealed secrets followed by the 256
    complementary public hashes, in digest-bit order."""
    _check_seed(seed)
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    reveals = bytearray()
    comps = bytearray()
    prefix = seed + b"ots"
    for j in range(BITS):
        bit = (digest[j >> 3] >> (7 - (j & 7))) & 1
        reveals += hashlib.sha256(prefix + struct.pack(">IHB", index, j, bit)).digest()
        comp_secret = hashlib.sha256(prefix + struct.pack(">IHB", index, j, 1 - bit)).digest()
        comps += hashlib.sha256(comp_secret).digest()
    return bytes(reveals + comps)


def ots_leaf_from_reveal(digest, opened):
    """Candidate leaf hash recomputed from an OTS opening.

    Total on arbitrary ``opened`` of the right length: the result simply will
    not match the Merkle tree unless every value is genuine.
    """
    if len(digest) != 32 or len(opened) != OPENED_LEN:
        raise ValueError("bad opening size")
    pubs = bytearray()
    for j in range(BITS):
        bit = (digest[j >> 3] >> (7 - (j & 7))) & 1
        revealed_pub = hashlib.sha256(opened[j * 32:(j + 1) * 32]).digest()
        comp_pub = opened[REVEAL_LEN + j * 32:REVEAL_LEN + (j + 1) * 32]
        if bit == 0:
            pubs += revealed_pub + comp_pub
        else:
            pubs += comp_pub + revealed_pub
    return hashlib.sha256(bytes(pubs)).digest()
