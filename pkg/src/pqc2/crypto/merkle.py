"""Binary Merkle tree over 32-byte digests, SHA-256 parents."""

from pqc2 import kernels
from pqc2.errors import BadLeafCount


def merkle_root(leaves) -> bytes:
    """Root of a full binary tree; leaf count must be a power of two >= 1.

    A single leaf is its own root.
    """
    n = len(leaves)
    if n < 1 or n & (n - 1):
        raise BadLeafCount(f"leaf count must be a power of two >= 1, got {n}")
    for leaf in leaves:
        if len(leaf) != 32:
            raise BadLeafCount("every leaf must be a 32-byte digest")
    level = b"".join(leaves)
    while len(level) > 32:
        level = kernels.hash_tree_level(level)
    return level


def build_levels(leaf_buffer: bytes) -> list:
    """All tree levels bottom-up, starting from a concatenated leaf buffer."""
    levels = [leaf_buffer]
    while len(levels[-1]) > 32:
        levels.append(kernels.hash_tree_level(levels[-1]))
    return levels


def auth_path(levels: list, index: int) -> list:
    """Sibling hashes from the leaf level upward, excluding the root."""
    path = []
    for level in levels[:-1]:
        sibling = index ^ 1
        path.append(level[sibling * 32:(sibling + 1) * 32])
        index >>= 1
    return path


def climb(leaf: bytes, index: int, path: list) -> bytes:
    """Recompute the root from a leaf and its authentication path."""
    node = leaf
    for sibling in path:
        if index & 1:
            node = kernels.sha256(sibling + node)
        else:
            node = kernels.sha256(node + sibling)
        index >>= 1
    return node
