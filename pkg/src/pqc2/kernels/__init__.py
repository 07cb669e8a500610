"""Hash-kernel backend selection.

The hash-based signature scheme spends nearly all of its time in SHA-256
loops (a depth-10 keygen is about a million digests), so those loops live
behind a small kernel interface with two interchangeable backends:

  * ``pqc2.kernels._core``  - Cython + OpenSSL EVP, built by setup.py
  * ``pqc2.kernels._pure``  - hashlib, always available

The compiled core is preferred when importable. Set ``PQC2_PURE_KERNELS=1``
to force the fallback (used by the backend-comparison benchmark and tests).
"""

import os

if os.environ.get("PQC2_PURE_KERNELS"):
    from pqc2.kernels import _pure as _impl
else:
    try:
        from pqc2.kernels import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from pqc2.kernels import _pure as _impl

BACKEND = _impl.BACKEND
sha256 = _impl.sha256
hash_tree_level = _impl.hash_tree_level
ots_leaf_hashes = _impl.ots_leaf_hashes
ots_reveal = _impl.ots_reveal
ots_leaf_from_reveal = _impl.ots_leaf_from_reveal

BITS = 256
VALUE_LEN = 32
REVEAL_LEN = BITS * VALUE_LEN
OPENED_LEN = 2 * REVEAL_LEN


def available_backends():
    """Names of importable backends, compiled one first."""
    names = []
    try:
        from pqc2.kernels import _core  # noqa: F401

        names.append(_core.BACKEND)
    except ImportError:
        pass
    from pqc2.kernels import _pure

    names.append(_pure.BACKEND)
    return names


def get_backend(name):
    if name == "python":
        from pqc2.kernels import _pure

        return _pure
    if name == "cython":
        from pqc2.kernels import _core

        return _core
    raise ValueError(f"unknown kernel backend: {name}")
