"""Versioned binary checkpoint container.

Layout: magic "HMCK", u32 format version, u32 entry count, then per entry
u32 name length + utf-8 name, u32 ndim, u32 dims, raw little-endian f64
values. Entries are written name-sorted so identical contents give
identical bytes.
"""

import struct

import numpy as np

from habitmotion.errors import SchemaError

MAGIC = b"HMCK"
VERSION = 1


def save_tensors(path, entries) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(entries)))
        for name in sorted(entries):
            arr = np.ascontiguousarray(entries[name], dtype="<f8")
            nb = name.encode("utf-8")
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())


def load_tensors(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise SchemaError(f"{path}: not a HMCK checkpoint")
    version, count = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise SchemaError(f"{path}: unsupported checkpoint version {version}")
    off = 12
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", raw, off)
        off += 4
        name = raw[off : off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<I", raw, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}I", raw, off)
        off += 4 * ndim
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(raw, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        out[name] = arr.astype(np.float64)
    if off != len(raw):
        raise SchemaError(f"{path}: trailing bytes after last entry")
    return out


def save_scalar_meta(entries: dict, meta: dict) -> None:
    """Fold numeric metadata into a tensor table under meta.<key> names."""
    for key, value in meta.items():
        entries[f"meta.{key}"] = np.asarray(float(value))


def read_scalar_meta(entries: dict) -> dict:
    return {
        name[len("meta.") :]: float(np.asarray(arr).reshape(-1)[0])
        for name, arr in entries.items()
        if name.startswith("meta.")
    }
