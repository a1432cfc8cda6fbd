"""NTF1 file format and CSV export round-trips."""

import struct

import numpy as np
import pytest

from synergy_tensor import (
    export_unfolding_csv,
    read_tensor,
    unfold,
    write_matrix_csv,
    write_tensor,
)
from synergy_tensor.ntf import MAGIC


def test_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    for shape in [(1,), (4,), (2, 3), (3, 4, 5), (2, 3, 4, 5)]:
        t = rng.standard_normal(shape)
        path = tmp_path / "t.ntf"
        write_tensor(path, t)
        back = read_tensor(path)
        assert back.shape == t.shape
        assert np.array_equal(back, t)


def test_roundtrip_preserves_special_values(tmp_path):
    t = np.array([[0.0, -0.0], [1e-308, 1e308]])
    back = read_tensor(write_tensor(tmp_path / "t.ntf", t))
    assert np.array_equal(back, t)
    # -0.0 keeps its sign bit
    assert np.signbit(back[0, 1])


def test_header_layout(tmp_path):
    t = np.arange(6.0).reshape(2, 3)
    path = write_tensor(tmp_path / "t.ntf", t)
    data = path.read_bytes()
    assert data[:4] == MAGIC
    assert struct.unpack("<I", data[4:8]) == (2,)
    assert struct.unpack("<2Q", data[8:24]) == (2, 3)
    assert len(data) == 24 + 6 * 8
    # payload is first-index-fastest
    flat = np.frombuffer(data, dtype="<f8", offset=24)
    assert np.array_equal(flat, t.ravel(order="F"))


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ntf"
    path.write_bytes(b"XXXX" + b"\x00" * 20)
    with pytest.raises(ValueError, match="bad.ntf.*magic"):
        read_tensor(path)


def test_read_rejects_truncated_file(tmp_path):
    path = tmp_path / "short.ntf"
    path.write_bytes(MAGIC + b"\x01")
    with pytest.raises(ValueError, match="too short"):
        read_tensor(path)


def test_read_rejects_truncated_header(tmp_path):
    path = tmp_path / "hdr.ntf"
    path.write_bytes(MAGIC + struct.pack("<I", 3) + struct.pack("<Q", 2))
    with pytest.raises(ValueError, match="truncated"):
        read_tensor(path)


def test_read_rejects_bad_mode_count(tmp_path):
    path = tmp_path / "modes.ntf"
    path.write_bytes(MAGIC + struct.pack("<I", 0))
    with pytest.raises(ValueError, match="mode count"):
        read_tensor(path)
    path.write_bytes(MAGIC + struct.pack("<I", 65) + b"\x00" * 8 * 65)
    with pytest.raises(ValueError, match="mode count"):
        read_tensor(path)


def test_read_rejects_zero_sized_mode(tmp_path):
    path = tmp_path / "zero.ntf"
    path.write_bytes(MAGIC + struct.pack("<I", 2) + struct.pack("<2Q", 2, 0))
    with pytest.raises(ValueError, match="non-positive"):
        read_tensor(path)


def test_read_rejects_payload_size_mismatch(tmp_path):
    path = write_tensor(tmp_path / "t.ntf", np.zeros((2, 3)))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(ValueError, match="payload size mismatch"):
        read_tensor(path)
    path.write_bytes(data + b"\x00" * 8)
    with pytest.raises(ValueError, match="payload size mismatch"):
        read_tensor(path)


def test_write_rejects_scalars():
    with pytest.raises(ValueError):
        write_tensor("unused.ntf", np.float64(3.0))


def test_write_does_not_leave_temp_files(tmp_path):
    write_tensor(tmp_path / "t.ntf", np.ones(3))
    assert [p.name for p in tmp_path.iterdir()] == ["t.ntf"]


def test_overwrite_replaces_content(tmp_path):
    path = tmp_path / "t.ntf"
    write_tensor(path, np.ones((2, 2)))
    write_tensor(path, np.zeros(5))
    assert np.array_equal(read_tensor(path), np.zeros(5))


def test_matrix_csv_roundtrips_through_float(tmp_path):
    rng = np.random.default_rng(1)
    m = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-8, 8, size=(4, 3))
    path = write_matrix_csv(tmp_path / "m.csv", m)
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    back = np.array([[float(v) for v in line.split(",")] for line in lines])
    assert np.array_equal(back, m)


def test_matrix_csv_header(tmp_path):
    path = write_matrix_csv(
        tmp_path / "m.csv", np.zeros((1, 2)), header=["a", "b"]
    )
    assert path.read_text().splitlines()[0] == "a,b"
    with pytest.raises(ValueError, match="header"):
        write_matrix_csv(tmp_path / "m2.csv", np.zeros((1, 2)), header=["a"])


def test_matrix_csv_rejects_non_2d(tmp_path):
    with pytest.raises(ValueError):
        write_matrix_csv(tmp_path / "m.csv", np.zeros(3))


def test_export_unfolding_matches_unfold(tmp_path):
    rng = np.random.default_rng(2)
    t = rng.random((2, 3, 4))
    path = export_unfolding_csv(tmp_path / "u.csv", t, 1)
    lines = path.read_text().splitlines()
    back = np.array([[float(v) for v in line.split(",")] for line in lines])
    assert np.array_equal(back, unfold(t, 1))
