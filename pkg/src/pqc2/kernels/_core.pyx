# cython: boundscheck=False, wraparound=False
"""Compiled hash kernels backed by OpenSSL's EVP SHA-256.

Bit-for-bit equivalent to pqc2.kernels._pure; see that module for the
normative derivation rules. The win here is running the per-leaf loops
(512 secret derivations plus 512 public hashes per leaf) without any
Python object churn.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cdef extern from "openssl/evp.h":
    ctypedef struct EVP_MD_CTX:
        pass
    ctypedef struct EVP_MD:
        pass
    const EVP_MD *EVP_sha256()
    EVP_MD *EVP_MD_fetch(void *ctx, const char *algorithm, const char *properties)
    EVP_MD_CTX *EVP_MD_CTX_new()
    void EVP_MD_CTX_free(EVP_MD_CTX *ctx)
    int EVP_DigestInit_ex(EVP_MD_CTX *ctx, const EVP_MD *type, void *impl)
    int EVP_DigestUpdate(EVP_MD_CTX *ctx, const void *d, size_t cnt)
    int EVP_DigestFinal_ex(EVP_MD_CTX *ctx, unsigned char *md, unsigned int *s)

# Fetched once: re-resolving the provider per EVP_DigestInit_ex call is the
# dominant cost for 39-byte inputs on OpenSSL 3.
cdef const EVP_MD *_MD = EVP_MD_fetch(NULL, "SHA256", NULL)
if _MD is NULL:
    _MD = EVP_sha256()

BACKEND = "cython"

DEF BITS = 256
DEF VALUE_LEN = 32
DEF REVEAL_LEN = BITS * VALUE_LEN
DEF OPENED_LEN = 2 * REVEAL_LEN
DEF PUBS_LEN = 2 * BITS * VALUE_LEN


cdef inline int _hash(EVP_MD_CTX *ctx, const unsigned char *data, size_t n,
                      unsigned char *out):
    cdef unsigned int olen = 0
    if EVP_DigestInit_ex(ctx, _MD, NULL) != 1:
        return -1
    if EVP_DigestUpdate(ctx, data, n) != 1:
        return -1
    if EVP_DigestFinal_ex(ctx, out, &olen) != 1:
        return -1
    return 0


cdef inline void _put_ids(unsigned char *buf, unsigned int i, unsigned int j,
                          unsigned int b):
    # u32be(i) || u16be(j) || u8(b)
    buf[0] = (i >> 24) & 0xFF
    buf[1] = (i >> 16) & 0xFF
    buf[2] = (i >> 8) & 0xFF
    buf[3] = i & 0xFF
    buf[4] = (j >> 8) & 0xFF
    buf[5] = j & 0xFF
    buf[6] = b & 0xFF


def sha256(data):
    cdef const unsigned char *src = data
    cdef bytes out = PyBytes_FromStringAndSize(NULL, 32)
    cdef unsigned char *dst = <unsigned char *>PyBytes_AS_STRING(out)
    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    if ctx is NULL:
        raise MemoryError
    try:
        if _hash(ctx, src, len(data), dst) != 0:
            raise RuntimeError("EVP digest failed")
    finally:
        EVP_MD_CTX_free(ctx)
    return out


def hash_tree_level(nodes):
    """Hash 2n concatenated 32-byte nodes pairwise into n parents."""
    cdef Py_ssize_t total = len(nodes)
    if total % 64 != 0 or total == 0:
        raise ValueError("node buffer must hold an even number of 32-byte nodes")
    cdef const unsigned char *src = nodes
    cdef bytes out = PyBytes_FromStringAndSize(NULL, total // 2)
    cdef unsigned char *dst = <unsigned char *>PyBytes_AS_STRING(out)
    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    cdef Py_ssize_t off = 0
    if ctx is NULL:
        raise MemoryError
    try:
        while off < total:
            if _hash(ctx, src + off, 64, dst + off // 2) != 0:
                raise RuntimeError("EVP digest failed")
            off += 64
    finally:
        EVP_MD_CTX_free(ctx)
    return out


def ots_leaf_hashes(seed, start, count):
    """Leaf hashes for indices [start, start+count), concatenated."""
    if len(seed) != 32:
        raise ValueError("seed must be 32 bytes")
    cdef const unsigned char *seed_ptr = seed
    cdef Py_ssize_t seed_len = len(seed)
    cdef Py_ssize_t prefix_len = seed_len + 3
    cdef unsigned int first = start
    cdef unsigned int n = count
    cdef bytes out = PyBytes_FromStringAndSize(NULL, <Py_ssize_t>n * VALUE_LEN)
    cdef unsigned char *dst = <unsigned char *>PyBytes_AS_STRING(out)
    cdef unsigned char *msg = <unsigned char *>malloc(prefix_len + 7)
    cdef unsigned char *pubs = <unsigned char *>malloc(PUBS_LEN)
    cdef unsigned char secret[32]
    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    cdef unsigned int i, j, b
    if msg is NULL or pubs is NULL or ctx is NULL:
        free(msg)
        free(pubs)
        if ctx is not NULL:
            EVP_MD_CTX_free(ctx)
        raise MemoryError
    memcpy(msg, seed_ptr, seed_len)
    msg[seed_len] = b'o'
    msg[seed_len + 1] = b't'
    msg[seed_len + 2] = b's'
    try:
        for i in range(first, first + n):
            for j in range(BITS):
                for b in range(2):
                    _put_ids(msg + prefix_len, i, j, b)
                    if _hash(ctx, msg, prefix_len + 7, secret) != 0:
                        raise RuntimeError("EVP digest failed")
                    if _hash(ctx, secret, 32, pubs + (j * 2 + b) * VALUE_LEN) != 0:
                        raise RuntimeError("EVP digest failed")
            if _hash(ctx, pubs, PUBS_LEN, dst + (i - first) * VALUE_LEN) != 0:
                raise RuntimeError("EVP digest failed")
    finally:
        free(msg)
        free(pubs)
        EVP_MD_CTX_free(ctx)
    return out


def ots_reveal(seed, index, digest):
    """OTS opening for one leaf: 256 revealed secrets followed by the 256
    complementary public hashes, in digest-bit order."""
    if len(seed) != 32:
        raise ValueError("seed must be 32 bytes")
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    cdef const unsigned char *seed_ptr = seed
    cdef const unsigned char *dig = digest
    cdef Py_ssize_t seed_len = len(seed)
    cdef Py_ssize_t prefix_len = seed_len + 3
    cdef unsigned int i = index
    cdef bytes out = PyBytes_FromStringAndSize(NULL, OPENED_LEN)
    cdef unsigned char *dst = <unsigned char *>PyBytes_AS_STRING(out)
    cdef unsigned char *msg = <unsigned char *>malloc(prefix_len + 7)
    cdef unsigned char secret[32]
    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    cdef unsigned int j, bit
    if msg is NULL or ctx is NULL:
        free(msg)
        if ctx is not NULL:
            EVP_MD_CTX_free(ctx)
        raise MemoryError
    memcpy(msg, seed_ptr, seed_len)
    msg[seed_len] = b'o'
    msg[seed_len + 1] = b't'
    msg[seed_len + 2] = b's'
    try:
        for j in range(BITS):
            bit = (dig[j >> 3] >> (7 - (j & 7))) & 1
            _put_ids(msg + prefix_len, i, j, bit)
            if _hash(ctx, msg, prefix_len + 7, dst + j * VALUE_LEN) != 0:
                raise RuntimeError("EVP digest failed")
            _put_ids(msg + prefix_len, i, j, 1 - bit)
            if _hash(ctx, msg, prefix_len + 7, secret) != 0:
                raise RuntimeError("EVP digest failed")
            if _hash(ctx, secret, 32, dst + REVEAL_LEN + j * VALUE_LEN) != 0:
                raise RuntimeError("EVP digest failed")
    finally:
        free(msg)
        EVP_MD_CTX_free(ctx)
    return out


def ots_leaf_from_reveal(digest, opened):
    """Candidate leaf hash recomputed from an OTS opening."""
    if len(digest) != 32 or len(opened) != OPENED_LEN:
        raise ValueError("bad opening size")
    cdef const unsigned char *dig = digest
    cdef const unsigned char *op = opened
    cdef bytes out = PyBytes_FromStringAndSize(NULL, 32)
    cdef unsigned char *dst = <unsigned char *>PyBytes_AS_STRING(out)
    cdef unsigned char *pubs = <unsigned char *>malloc(PUBS_LEN)
    cdef unsigned char revealed_pub[32]
    cdef EVP_MD_CTX *ctx = EVP_MD_CTX_new()
    cdef unsigned int j, bit
    if pubs is NULL or ctx is NULL:
        free(pubs)
        if ctx is not NULL:
            EVP_MD_CTX_free(ctx)
        raise MemoryError
    try:
        for j in range(BITS):
            bit = (dig[j >> 3] >> (7 - (j & 7))) & 1
            if _hash(ctx, op + j * VALUE_LEN, 32, revealed_pub) != 0:
                raise RuntimeError("EVP digest failed")
            memcpy(pubs + (j * 2 + bit) * VALUE_LEN, revealed_pub, 32)
            memcpy(pubs + (j * 2 + (1 - bit)) * VALUE_LEN,
                   op + REVEAL_LEN + j * VALUE_LEN, 32)
        if _hash(ctx, pubs, PUBS_LEN, dst) != 0:
            raise RuntimeError("EVP digest failed")
    finally:
        free(pubs)
        EVP_MD_CTX_free(ctx)
    return out
