"""NTF1 binary tensor files and delimited-text export helpers.

NTF1 layout, all little-endian:

    bytes 0..3   magic b"NTF1"
    bytes 4..7   u32 mode count N
    next 8*N     u64 mode sizes
    rest         float64 payload, first index varies fastest

Writes are atomic: content goes to a sibling temp file which is then
renamed over the target.
"""

from __future__ import annotations

import math
import os
import struct
from pathlib import Path

import numpy as np

from .tensor_ops import unfold

MAGIC = b"NTF1"
_MAX_MODES = 64


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_tensor(path, tensor) -> Path:
    """Serialise `tensor` to `path` in NTF1 format."""
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError("tensor must have at least one mode")
    if arr.ndim > _MAX_MODES:
        raise ValueError(f"tensor has {arr.ndim} modes, NTF1 caps at {_MAX_MODES}")
    path = Path(path)
    header = MAGIC + struct.pack("<I", arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = arr.ravel(order="F").astype("<f8").tobytes()
    _atomic_write_bytes(path, header + payload)
    return path


def read_tensor(path) -> np.ndarray:
    """Read an NTF1 file back into a float64 array.

    Raises ValueError with a diagnostic naming the file on bad magic,
    corrupt headers, or truncated payloads.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 8:
        raise ValueError(f"{path}: too short to be an NTF1 file")
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not an NTF1 file (bad magic {data[:4]!r})")
    (ndim,) = struct.unpack("<I", data[4:8])
    if not 1 <= ndim <= _MAX_MODES:
        raise ValueError(f"{path}: mode count {ndim} out of range 1..{_MAX_MODES}")
    header_end = 8 + 8 * ndim
    if len(data) < header_end:
        raise ValueError(f"{path}: truncated NTF1 header")
    shape = struct.unpack(f"<{ndim}Q", data[8:header_end])
    if any(s < 1 for s in shape):
        raise ValueError(f"{path}: non-positive mode size in header {shape}")
    count = math.prod(shape)
    expected = header_end + 8 * count
    if len(data) != expected:
        raise ValueError(
            f"{path}: payload size mismatch (expected {expected} bytes for "
            f"shape {shape}, file has {len(data)})"
        )
    flat = np.frombuffer(data, dtype="<f8", offset=header_end, count=count)
    return flat.astype(np.float64).reshape(shape, order="F")


def write_matrix_csv(path, matrix, header=None) -> Path:
    """Write a 2-D array as comma-separated text, one row per line.

    Values use shortest-round-trip float formatting, so reading them back
    as float64 reproduces the exact bits.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got {m.ndim}-D")
    lines = []
    if header is not None:
        header = list(header)
        if len(header) != m.shape[1]:
            raise ValueError(
                f"header has {len(header)} fields for {m.shape[1]} columns"
            )
        lines.append(",".join(str(h) for h in header))
    for row in m:
        lines.append(",".join(repr(float(v)) for v in row))
    path = Path(path)
    _atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def export_unfolding_csv(path, tensor, mode: int, header=None) -> Path:
    """Write the mode-`mode` unfolding of `tensor` as CSV."""
    return write_matrix_csv(path, unfold(tensor, mode), header=header)
