"""Hash kernel backends: the compiled and pure-Python implementations must
agree bit for bit, and both must match the naive oracle derivations."""

import hashlib
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2 import kernels

import oracles

BACKENDS = [kernels.get_backend(name) for name in kernels.available_backends()]
IDS = [b.BACKEND for b in BACKENDS]

SEED = bytes(range(32))


@pytest.fixture(params=BACKENDS, ids=IDS)
def backend(request):
    return request.param


def test_at_least_pure_backend_present():
    assert "python" in kernels.available_backends()


def test_env_override_selects_pure():
    code = "from pqc2 import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "PQC2_PURE_KERNELS": "1"},
    )
    assert out.stdout.strip() == "python"


def test_get_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.get_backend("gpu")


@given(st.binary(max_size=200))
def test_sha256_matches_hashlib(data):
    for b in BACKENDS:
        assert b.sha256(data) == hashlib.sha256(data).digest()


def test_hash_tree_level_pairs(backend):
    nodes = [hashlib.sha256(bytes([i])).digest() for i in range(8)]
    got = backend.hash_tree_level(b"".join(nodes))
    want = b"".join(
        hashlib.sha256(nodes[k] + nodes[k + 1]).digest() for k in range(0, 8, 2)
    )
    assert got == want


def test_hash_tree_level_single_pair(backend):
    buf = bytes(64)
    assert backend.hash_tree_level(buf) == hashlib.sha256(buf).digest()


def test_hash_tree_level_rejects_odd_buffer(backend):
    with pytest.raises(ValueError):
        backend.hash_tree_level(bytes(96))
    with pytest.raises(ValueError):
        backend.hash_tree_level(b"")


def test_leaf_hashes_match_oracle(backend):
    got = backend.ots_leaf_hashes(SEED, 0, 3)
    assert len(got) == 3 * 32
    for i in range(3):
        assert got[i * 32 : (i + 1) * 32] == oracles.ots_leaf_hash(SEED, i)


def test_leaf_hashes_offset(backend):
    # leaf index feeds the derivation, so a shifted range must reproduce it
    block = backend.ots_leaf_hashes(SEED, 5, 2)
    assert block[:32] == oracles.ots_leaf_hash(SEED, 5)
    assert block[32:] == oracles.ots_leaf_hash(SEED, 6)


def test_reveal_layout_matches_oracle(backend):
    digest = hashlib.sha256(b"message").digest()
    opened = backend.ots_reveal(SEED, 7, digest)
    assert len(opened) == kernels.OPENED_LEN
    for j in range(256):
        bit = (digest[j >> 3] >> (7 - (j & 7))) & 1
        reveal = opened[j * 32 : (j + 1) * 32]
        comp = opened[kernels.REVEAL_LEN + j * 32 : kernels.REVEAL_LEN + (j + 1) * 32]
        assert reveal == oracles.ots_secret(SEED, 7, j, bit)
        assert comp == hashlib.sha256(oracles.ots_secret(SEED, 7, j, 1 - bit)).digest()


@settings(deadline=None, max_examples=25)
@given(st.binary(min_size=32, max_size=32), st.integers(0, 1000))
def test_reveal_reconstructs_leaf(digest, index):
    for b in BACKENDS:
        opened = b.ots_reveal(SEED, index, digest)
        leaf = b.ots_leaf_from_reveal(digest, opened)
        assert leaf == b.ots_leaf_hashes(SEED, index, 1)


def test_leaf_from_reveal_rejects_bad_lengths(backend):
    digest = bytes(32)
    with pytest.raises(ValueError):
        backend.ots_leaf_from_reveal(digest, bytes(100))
    with pytest.raises(ValueError):
        backend.ots_leaf_from_reveal(bytes(31), bytes(kernels.OPENED_LEN))


def test_reveal_rejects_bad_lengths(backend):
    with pytest.raises(ValueError):
        backend.ots_reveal(SEED, 0, bytes(31))
    with pytest.raises(ValueError):
        backend.ots_reveal(bytes(16), 0, bytes(32))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree():
    a, b = BACKENDS[0], BACKENDS[1]
    digest = hashlib.sha256(b"agreement").digest()
    assert a.ots_leaf_hashes(SEED, 0, 8) == b.ots_leaf_hashes(SEED, 0, 8)
    for idx in (0, 1, 255, 65535):
        oa = a.ots_reveal(SEED, idx, digest)
        assert oa == b.ots_reveal(SEED, idx, digest)
        assert a.ots_leaf_from_reveal(digest, oa) == b.ots_leaf_from_reveal(digest, oa)
    buf = b"".join(hashlib.sha256(bytes([i])).digest() for i in range(16))
    assert a.hash_tree_level(buf) == b.hash_tree_level(buf)
