"""
Binary checkpoints of a ParameterStore.

Layout (little-endian): magic ``CPLAB01\\0``, u64 entry count, then per entry: u64 name length,
UTF-8 name, u64 rank, rank x u64 dims, f64 values, f64 first moments, f64 second moments,
u64 step count.
"""
import logging
import math
import struct

import numpy as np

from src.errors import CheckpointError
from src.tensor.params import ParameterStore
from src.utils.data_loader import atomic_write_bytes

log = logging.getLogger(__name__)

MAGIC = b'CPLAB01\x00'
_U64 = struct.Struct('<Q')


def encode_store(store):
    """Serialise a store to bytes; entries keep their insertion order."""
    parts = [MAGIC, _U64.pack(len(store))]
    for name, entry in store.items():
        encoded = name.encode('utf-8')
        parts.append(_U64.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_U64.pack(entry.value.ndim))
        parts.extend(_U64.pack(d) for d in entry.value.shape)
        for array in (entry.value, entry.m, entry.v):
            parts.append(np.ascontiguousarray(array, dtype='<f8').tobytes())
        parts.append(_U64.pack(entry.step))
    return b''.join(parts)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, size, what):
        if self.pos + size > len(self.data):
            raise CheckpointError(
                f"checkpoint truncated while reading {what} at byte {self.pos} "
                f"(need {size}, have {len(self.data) - self.pos})")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u64(self, what):
        return _U64.unpack(self.take(8, what))[0]


def decode_store(data):
    """
    Parse checkpoint bytes into a new store.

    Raises:
        CheckpointError: On a bad magic, truncation or trailing bytes.
    """
    reader = _Reader(data)
    magic = reader.take(len(MAGIC), 'magic')
    if magic != MAGIC:
        raise CheckpointError(f"bad checkpoint magic {magic!r}, expected {MAGIC!r}")
    count = reader.u64('entry count')
    entries = []
    for index in range(count):
        name_length = reader.u64(f"name length of entry {index}")
        try:
            name = reader.take(name_length, f"name of entry {index}").decode('utf-8')
        except UnicodeDecodeError as e:
            raise CheckpointError(f"entry {index} has an invalid UTF-8 name: {e}") from None
        rank = reader.u64(f"rank of {name}")
        shape = tuple(reader.u64(f"dims of {name}") for _ in range(rank))
        size = math.prod(shape) * 8
        if 3 * size > len(data) - reader.pos:
            raise CheckpointError(
                f"entry {name!r} declares shape {shape} but only {len(data) - reader.pos} bytes remain")
        arrays = [
            np.frombuffer(reader.take(size, f"{part} of {name}"), dtype='<f8').astype(np.float64).reshape(shape)
            for part in ('values', 'first moments', 'second moments')
        ]
        step = reader.u64(f"step of {name}")
        entries.append((name, arrays, step))
    if reader.pos != len(data):
        raise CheckpointError(f"{len(data) - reader.pos} trailing bytes after {count} entries")

    # Built only after the whole file parsed, so a bad file leaves no partial store
    store = ParameterStore()
    for name, (value, m, v), step in entries:
        try:
            store.restore(name, value, m, v, step)
        except KeyError:
            raise CheckpointError(f"duplicate entry name {name!r}") from None
    return store


def save_checkpoint(store, path):
    """
    Atomically write a store to ``path``.

    Returns:
        str: The path written.
    """
    atomic_write_bytes(encode_store(store), path)
    log.info("Saved checkpoint with %d entries to %s", len(store), path)
    return path


def load_checkpoint(path):
    """
    Read a store written by ``save_checkpoint``.

    Raises:
        CheckpointError: If the file is malformed.
        FileNotFoundError: If the file does not exist.
    """
    with open(path, 'rb') as f:
        data = f.read()
    return decode_store(data)
