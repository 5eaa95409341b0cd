"""KSF1 binary container for named real tensors.

Layout, all integers little-endian:
    magic   4 bytes  b"KSF1"
    version u8       currently 1
    count   u32      number of named entries
    entry:
        name_len u32, name UTF-8 bytes
        rank     u32, dims rank x u32
        dtype    u8   1 = f32, 2 = f64
        data     raw little-endian scalars, row-major

Checkpoints, dataset records and any other tensor bundle all share this
one format.
"""

import struct

import numpy as np

from .errors import ValidationError

MAGIC = b"KSF1"
VERSION = 1

_TAG_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_KIND_TO_TAG = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}


def save(path, entries):
    """Write a dict of name -> real ndarray."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<B", VERSION)
    blob += struct.pack("<I", len(entries))
    for name, arr in entries.items():
        arr = np.asarray(arr)
        if arr.dtype not in _KIND_TO_TAG:
            raise ValidationError(f"ksfile: unsupported dtype {arr.dtype} for {name!r}")
        nb = name.encode("utf-8")
        blob += struct.pack("<I", len(nb)) + nb
        blob += struct.pack("<I", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
        blob += struct.pack("<B", _KIND_TO_TAG[arr.dtype])
        blob += np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<")).tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def load(path):
    """Read a container back into a dict of name -> ndarray."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValidationError(f"ksfile: bad magic in {path}")
    version = blob[4]
    if version != VERSION:
        raise ValidationError(f"ksfile: unsupported version {version}")
    (count,) = struct.unpack_from("<I", blob, 5)
    offset = 9
    out = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (rank,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        dims = struct.unpack_from(f"<{rank}I", blob, offset)
        offset += 4 * rank
        tag = blob[offset]
        offset += 1
        if tag not in _TAG_TO_DTYPE:
            raise ValidationError(f"ksfile: unknown dtype tag {tag}")
        dtype = _TAG_TO_DTYPE[tag]
        n = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(blob, dtype=dtype, count=n, offset=offset).reshape(dims)
        offset += n * dtype.itemsize
        out[name] = arr.copy()
    return out
