"""Wire capture: record exactly what crossed each broker socket.

The eavesdropper's viewpoint on a loopback testbed. Bytes are logged verbatim
post-encryption / pre-decryption, so a capture of a secure run contains only
handshake metadata and ciphertext while a plaintext run leaks payloads whole.

File format: magic "PQCP", then repeated records of
u64 timestamp_us | u8 direction | u16 addr_len + addr | u32 len + bytes.
"""

import struct
import threading
import time
from dataclasses import dataclass
from typing import List, Tuple

from pqc2.errors import MalformedCapture

MAGIC = b"PQCP"

DIR_INBOUND = 0
DIR_OUTBOUND = 1

_HEAD = struct.Struct(">QBH")


@dataclass(frozen=True)
class CaptureRecord:
    ts_us: int
    direction: int
    peer: str
    data: bytes


class CaptureWriter:
    """Append-only capture file; safe to call from many connection threads."""

    def __init__(self, path: str):
        self._lock = threading.Lock()
        self._fh = open(path, "wb")
        self._fh.write(MAGIC)
        self._fh.flush()

    def record(self, direction: int, peer: str, data: bytes) -> None:
        if direction not in (DIR_INBOUND, DIR_OUTBOUND):
            raise ValueError(f"bad capture direction {direction}")
        addr = peer.encode()
        blob = (
            _HEAD.pack(int(time.time() * 1e6), direction, len(addr))
            + addr
            + struct.pack(">I", len(data))
            + data
        )
        with self._lock:
            self._fh.write(blob)
            self._fh.flush()

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    def __enter__(self) -> "CaptureWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def capture_load(path: str) -> List[CaptureRecord]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise MalformedCapture("missing PQCP magic")
    records: List[CaptureRecord] = []
    off = 4
    total = len(blob)
    while off < total:
        if off + _HEAD.size > total:
            raise MalformedCapture(f"truncated record header at offset {off}")
        ts_us, direction, addr_len = _HEAD.unpack_from(blob, off)
        off += _HEAD.size
        if direction not in (DIR_INBOUND, DIR_OUTBOUND):
            raise MalformedCapture(f"bad direction byte {direction}")
        if off + addr_len + 4 > total:
            raise MalformedCapture(f"truncated record at offset {off}")
        peer = blob[off : off + addr_len].decode(errors="replace")
        off += addr_len
        (data_len,) = struct.unpack_from(">I", blob, off)
        off += 4
        if off + data_len > total:
            raise MalformedCapture(f"truncated record body at offset {off}")
        records.append(CaptureRecord(ts_us, direction, peer, blob[off : off + data_len]))
        off += data_len
    return records


def capture_scan(records: List[CaptureRecord], needle: bytes) -> List[Tuple[int, int]]:
    """Every (record index, byte offset) where needle occurs, overlaps included."""
    if not needle:
        raise ValueError("empty needle matches everywhere; refusing")
    hits: List[Tuple[int, int]] = []
    for idx, rec in enumerate(records):
        start = rec.data.find(needle)
        while start != -1:
            hits.append((idx, start))
            start = rec.data.find(needle, start + 1)
    return hits
