"""Parameter checkpoints: length-prefixed named f32 arrays, little-endian.

Layout: magic ``AMRC``, u16 version, u32-length-prefixed UTF-8 config hash,
u32 array count, then per array: u16 name length, name, u8 ndim, ndim * u32
dims, raw f32 payload.
"""

import struct

import numpy as np

from ..errors import BadMagicError, TruncatedFileError, VersionMismatchError, ConsistencyError

MAGIC = b"AMRC"
VERSION = 1


def save_params(path, params, config_hash: str):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        blob = config_hash.encode("utf-8")
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        entries = [
            (f"{lname}/{pname}", arr)
            for lname, group in sorted(params.items())
            for pname, arr in sorted(group.items())
        ]
        fh.write(struct.pack("<I", len(entries)))
        for name, arr in entries:
            nb = name.encode("utf-8")
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_params(path, expect_hash: str | None = None):
    """Returns (nested params dict, config hash)."""
    with open(path, "rb") as fh:
        data = fh.read()
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(data):
            raise TruncatedFileError(f"{path}: need {n} bytes at offset {off}")
        out = data[off : off + n]
        off += n
        return out

    if take(4) != MAGIC:
        raise BadMagicError(f"{path}: not a checkpoint file")
    (version,) = struct.unpack("<H", take(2))
    if version != VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {VERSION}")
    (hlen,) = struct.unpack("<I", take(4))
    config_hash = take(hlen).decode("utf-8")
    if expect_hash is not None and config_hash != expect_hash:
        raise ConsistencyError(
            f"{path}: checkpoint built for config {config_hash[:12]}..., "
            f"expected {expect_hash[:12]}..."
        )
    (count,) = struct.unpack("<I", take(4))
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<H", take(2))
        name = take(nlen).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        n_items = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(take(4 * n_items), dtype="<f4").reshape(shape).copy()
        lname, pname = name.rsplit("/", 1)
        params.setdefault(lname, {})[pname] = arr
    if off != len(data):
        raise TruncatedFileError(f"{path}: {len(data) - off} trailing bytes")
    return params, config_hash
