"""Dense N-mode tensor primitives: unfolding, folding, mode products.

All routines operate on float64 numpy arrays.  The linearisation convention
throughout the package is "first index varies fastest" (Fortran order).  The
mode-n unfolding puts mode n on the rows and orders the columns by cycling
the remaining modes in increasing order, earliest mode fastest: entry
(i_0, ..., i_{N-1}) of the tensor lands in row i_n and column

    sum_{k != n} i_k * prod_{m < k, m != n} I_m.

For a 2x2x2 tensor with entries 1..8 stored first-index-fastest::

    unfold(t, 0) = [[1, 3, 5, 7],     unfold(t, 1) = [[1, 2, 5, 6],
                    [2, 4, 6, 8]]                     [3, 4, 7, 8]]

    unfold(t, 2) = [[1, 2, 3, 4],
                    [5, 6, 7, 8]]

Modes are 0-based, matching numpy axis numbering.
"""

from __future__ import annotations

import math

import numpy as np


def _as_tensor(tensor, name: str = "tensor") -> np.ndarray:
    arr = np.asarray(tensor, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError(f"{name} must have at least one mode")
    return arr


def _check_mode(ndim: int, mode: int) -> None:
    if not isinstance(mode, (int, np.integer)):
        raise ValueError(f"mode must be an integer, got {mode!r}")
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for an order-{ndim} tensor")


def require_nonnegative(arr: np.ndarray, name: str = "array") -> None:
    """Raise ValueError unless every entry is finite and >= 0."""
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")


def unfold(tensor, mode: int) -> np.ndarray:
    """Mode-`mode` matricisation of `tensor` (see module docstring)."""
    t = _as_tensor(tensor)
    _check_mode(t.ndim, mode)
    return np.moveaxis(t, mode, 0).reshape((t.shape[mode], -1), order="F")


def fold(matrix, mode: int, shape) -> np.ndarray:
    """Inverse of :func:`unfold`: rebuild the tensor of `shape` from its
    mode-`mode` unfolding."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got {m.ndim}-D")
    shape = tuple(int(s) for s in shape)
    if len(shape) < 1:
        raise ValueError("shape must have at least one mode")
    if any(s < 1 for s in shape):
        raise ValueError(f"shape {shape} has non-positive mode sizes")
    _check_mode(len(shape), mode)
    others = tuple(s for k, s in enumerate(shape) if k != mode)
    # math.prod on Python ints: no silent overflow on absurd shapes
    expected = (shape[mode], math.prod(others))
    if m.shape != expected:
        raise ValueError(
            f"matrix shape {m.shape} inconsistent with folding to {shape} "
            f"along mode {mode}; expected {expected}"
        )
    arr = m.reshape((shape[mode],) + others, order="F")
    return np.ascontiguousarray(np.moveaxis(arr, 0, mode))


def mode_n_product(tensor, matrix, mode: int) -> np.ndarray:
    """Mode-`mode` product: contract `tensor` with `matrix` (J x I_mode)
    along mode `mode`, replacing that mode's size I_mode with J."""
    t = _as_tensor(tensor)
    m = np.asarray(matrix, dtype=np.float64)
    _check_mode(t.ndim, mode)
    if m.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got {m.ndim}-D")
    if m.shape[1] != t.shape[mode]:
        raise ValueError(
            f"matrix has {m.shape[1]} columns but tensor mode {mode} "
            f"has size {t.shape[mode]}"
        )
    out = np.tensordot(m, t, axes=(1, mode))
    return np.ascontiguousarray(np.moveaxis(out, 0, mode))


def reconstruct(core, factors) -> np.ndarray:
    """Multilinear expansion core x_0 B_0 x_1 B_1 ... of a core tensor with
    one factor matrix per mode (factor k: I_k x J_k, J_k = core.shape[k])."""
    g = _as_tensor(core, "core")
    factors = list(factors)
    if len(factors) != g.ndim:
        raise ValueError(
            f"expected {g.ndim} factor matrices for an order-{g.ndim} core, "
            f"got {len(factors)}"
        )
    out = g
    for k, factor in enumerate(factors):
        f = np.asarray(factor, dtype=np.float64)
        if f.ndim != 2:
            raise ValueError(f"factor {k} must be 2-D, got {f.ndim}-D")
        if f.shape[1] != g.shape[k]:
            raise ValueError(
                f"factor {k} has {f.shape[1]} columns but core mode {k} "
                f"has size {g.shape[k]}"
            )
        out = mode_n_product(out, f, k)
    return out


def frobenius_norm(tensor) -> float:
    """Frobenius norm: sqrt of the sum of squared entries."""
    t = _as_tensor(tensor)
    return float(np.linalg.norm(t.reshape(-1)))
