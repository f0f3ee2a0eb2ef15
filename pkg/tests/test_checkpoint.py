import struct

import numpy as np
import pytest

from habitmotion.errors import SchemaError
from habitmotion.nk.checkpoint import (
    load_tensors,
    read_scalar_meta,
    save_scalar_meta,
    save_tensors,
)


def test_roundtrip_preserves_values_and_shapes(tmp_path):
    rng = np.random.default_rng(0)
    entries = {
        "enc.w": rng.standard_normal((3, 4, 5)),
        "enc.b": rng.standard_normal(7),
        "scalar": np.asarray(3.25),
    }
    path = tmp_path / "model.hmck"
    save_tensors(path, entries)
    loaded = load_tensors(path)
    assert set(loaded) == set(entries)
    for name in entries:
        assert loaded[name].shape == np.asarray(entries[name]).shape
        assert np.array_equal(loaded[name], entries[name])


def test_identical_contents_identical_bytes(tmp_path):
    entries = {"b": np.arange(6.0).reshape(2, 3), "a": np.ones(4)}
    save_tensors(tmp_path / "x1.hmck", entries)
    save_tensors(tmp_path / "x2.hmck", dict(reversed(list(entries.items()))))
    assert (tmp_path / "x1.hmck").read_bytes() == (tmp_path / "x2.hmck").read_bytes()


def test_magic_and_version_checked(tmp_path):
    good = tmp_path / "ok.hmck"
    save_tensors(good, {"a": np.zeros(2)})
    raw = bytearray(good.read_bytes())

    bad_magic = tmp_path / "bad_magic.hmck"
    bad_magic.write_bytes(b"NOPE" + bytes(raw[4:]))
    with pytest.raises(SchemaError, match="not a HMCK"):
        load_tensors(bad_magic)

    bad_version = tmp_path / "bad_version.hmck"
    mutated = bytearray(raw)
    mutated[4:8] = struct.pack("<I", 99)
    bad_version.write_bytes(bytes(mutated))
    with pytest.raises(SchemaError, match="version"):
        load_tensors(bad_version)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "trail.hmck"
    save_tensors(path, {"a": np.zeros(2)})
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(SchemaError, match="trailing"):
        load_tensors(path)


def test_scalar_meta_roundtrip():
    entries = {}
    save_scalar_meta(entries, {"k": 512, "tau": 0.5, "flag": 1})
    meta = read_scalar_meta(entries)
    assert meta == {"k": 512.0, "tau": 0.5, "flag": 1.0}
