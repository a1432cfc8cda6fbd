"""Non-negative Tucker decomposition and fixed-factor projection.

Decomposes a non-negative tensor X as a non-negative core G times one
non-negative factor matrix per mode,

    X  ~=  G x_0 B_0 x_1 B_1 ... x_{N-1} B_{N-1},

by alternating multiplicative updates (one sweep updates every factor and
then the core; each sub-update is the Lee-Seung rule for its unfolded
least-squares subproblem, so the Frobenius objective never increases).

Per sweep the data tensor is touched exactly twice: once through a shared
partial contraction that serves all factors but one, once fresh for that
remaining factor, whose contraction is then reused for the core numerator.
All other work happens on rank-sized arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nmf import EPS_DIV, FitOptions
from .ntf import _atomic_write_text, read_tensor, write_tensor
from .tensor_ops import frobenius_norm, reconstruct, require_nonnegative, unfold


@dataclass
class TuckerModel:
    """Fitted non-negative Tucker decomposition.

    Factor columns carry unit L2 norm (their scale is absorbed into the
    core); explained_variance = 1 - final_error**2, clipped to [0, 1].
    """

    core: np.ndarray
    factors: list[np.ndarray]
    final_error: float
    explained_variance: float
    objective_history: np.ndarray
    n_iterations: int
    seed: int

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape


def _mode_dot_t(x: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    """Contract x with mat.T along `mode`: out = x x_mode mat.T.

    mat is (I_mode x J); the result replaces that mode's size with J and
    leaves the mode order unchanged.  On C-contiguous input every path is
    a copy-free reshape into GEMM form (the middle-mode case batches over
    the leading modes).
    """
    n = x.ndim
    if mode == 0:
        out = mat.T @ x.reshape(x.shape[0], -1)
        return out.reshape((mat.shape[1],) + x.shape[1:])
    if mode == n - 1:
        out = x.reshape(-1, x.shape[-1]) @ mat
        return out.reshape(x.shape[:-1] + (mat.shape[1],))
    lead = math.prod(x.shape[:mode])
    out = np.matmul(mat.T, x.reshape(lead, x.shape[mode], -1))
    return out.reshape(x.shape[:mode] + (mat.shape[1],) + x.shape[mode + 1 :])


def _contract_modes(x: np.ndarray, mats, modes) -> np.ndarray:
    """Apply x x_m mats[m].T for the given modes.

    Modes with the greatest size reduction go first so intermediates
    shrink as fast as possible.
    """
    out = x
    order = sorted(modes, key=lambda m: x.shape[m] / mats[m].shape[1], reverse=True)
    for m in order:
        out = _mode_dot_t(out, mats[m], m)
    return out


def _contract_all_but(x: np.ndarray, mats, skip: int) -> np.ndarray:
    """Apply x x_m mats[m].T for every mode m != skip."""
    return _contract_modes(x, mats, [m for m in range(x.ndim) if m != skip])


def _gram_weighted_core(core: np.ndarray, grams, skip: int | None) -> np.ndarray:
    """core x_m grams[m] over every mode m != skip (grams are symmetric)."""
    out = core
    for m in range(core.ndim):
        if m != skip:
            out = _mode_dot_t(out, grams[m], m)
    return out


def _uniform_factor(size: int, rank: int) -> np.ndarray:
    return np.full((size, rank), 1.0 / np.sqrt(size))


def ntd(x, ranks, opts: FitOptions | None = None) -> TuckerModel:
    """Non-negative Tucker decomposition of `x` at the given mode ranks.

    Stops after `opts.max_iterations` sweeps or when the relative decrease
    of ||X - X_hat||_F between consecutive sweeps falls below
    `opts.tolerance`. Deterministic for a fixed seed.

    The per-sweep objective history is evaluated through the Gram identity
    ||X - X_hat||^2 = ||X||^2 - 2<G, C> + <G, G x Gram>, which costs nothing
    extra but saturates at a rounding floor of roughly 1e-8 * ||X|| when the
    fit is near exact; `final_error` is therefore recomputed from the direct
    residual after the loop.
    """
    opts = opts if opts is not None else FitOptions()
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim < 1:
        raise ValueError("x must have at least one mode")
    require_nonnegative(x, "x")
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != x.ndim:
        raise ValueError(
            f"expected {x.ndim} ranks for an order-{x.ndim} tensor, got {len(ranks)}"
        )
    for k, (r, size) in enumerate(zip(ranks, x.shape)):
        if not 1 <= r <= size:
            raise ValueError(f"rank {r} out of range 1..{size} for mode {k}")

    n_modes = x.ndim
    norm_x = frobenius_norm(x)
    if norm_x == 0.0:
        factors = [_uniform_factor(x.shape[k], ranks[k]) for k in range(n_modes)]
        return TuckerModel(np.zeros(ranks), factors, 0.0, 1.0, np.empty(0), 0, opts.seed)
    norm_x_sq = norm_x * norm_x

    rng = np.random.default_rng(opts.seed)
    factors = [1.0 - rng.random((x.shape[k], ranks[k])) for k in range(n_modes)]
    core = 1.0 - rng.random(ranks)

    # The shared pass is keyed on the mode with the greatest size reduction
    # so everything reusing it touches a small array; the data tensor
    # itself is read exactly twice per sweep.
    key = max(range(n_modes), key=lambda m: (x.shape[m] / ranks[m], m))

    history = []
    prev = None
    n_iterations = 0
    for _ in range(opts.max_iterations):
        n_iterations += 1
        if n_modes > 1:
            # Depends only on factors[key], which this loop never touches.
            partial = _mode_dot_t(x, factors[key], key)
            for n in range(n_modes):
                if n == key:
                    continue
                cn = _contract_modes(
                    partial, factors, [m for m in range(n_modes) if m not in (n, key)]
                )
                core_unf = unfold(core, n)
                num = unfold(cn, n) @ core_unf.T
                grams = [f.T @ f for f in factors]
                zzt = unfold(_gram_weighted_core(core, grams, n), n) @ core_unf.T
                factors[n] *= num / np.maximum(factors[n] @ zzt, EPS_DIV)
        # The key factor needs a fresh pass; its contraction feeds the core.
        c_key = _contract_all_but(x, factors, skip=key)
        core_unf = unfold(core, key)
        num = unfold(c_key, key) @ core_unf.T
        grams = [f.T @ f for f in factors]
        zzt = unfold(_gram_weighted_core(core, grams, key), key) @ core_unf.T
        factors[key] *= num / np.maximum(factors[key] @ zzt, EPS_DIV)

        num_core = _mode_dot_t(c_key, factors[key], key)
        grams = [f.T @ f for f in factors]
        core *= num_core / np.maximum(_gram_weighted_core(core, grams, None), EPS_DIV)

        # ||X - X_hat||^2 = ||X||^2 - 2<G, X x B.T> + <G, G x Gram>
        cross = float(np.sum(core * num_core))
        fit_sq = float(np.sum(core * _gram_weighted_core(core, grams, None)))
        obj = math.sqrt(max(norm_x_sq - 2.0 * cross + fit_sq, 0.0))
        history.append(obj)
        if obj == 0.0:
            break
        if prev is not None and prev - obj < opts.tolerance * prev:
            break
        prev = obj

    # Push factor scales into the core; collapsed columns become uniform
    # unit vectors whose core slices are zeroed by the scaling.
    for k in range(n_modes):
        norms = np.linalg.norm(factors[k], axis=0)
        pos = norms > 0
        factors[k][:, pos] /= norms[pos]
        factors[k][:, ~pos] = 1.0 / np.sqrt(x.shape[k])
        shape = [1] * n_modes
        shape[k] = ranks[k]
        core *= norms.reshape(shape)

    # Direct residual; the sweep-time identity cancels badly near exact fits.
    final_error = min(1.0, frobenius_norm(x - reconstruct(core, factors)) / norm_x)
    ev = min(1.0, max(0.0, 1.0 - final_error * final_error))
    return TuckerModel(
        core, factors, final_error, ev, np.asarray(history), n_iterations, opts.seed
    )


def project(
    x,
    model: TuckerModel,
    free_mode: int,
    max_iterations: int = 200,
    tolerance: float = 1e-6,
) -> np.ndarray:
    """Project `x` onto a fitted model, re-estimating only mode `free_mode`.

    Core and all other factors stay frozen; the free factor is fitted by
    the same multiplicative rule under a non-negativity constraint, from a
    deterministic start (the numerator matrix at its optimal least-squares
    scale). Returns the (x.shape[free_mode] x ranks[free_mode]) coefficient
    matrix.
    """
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    n_modes = len(model.factors)
    if x.ndim != n_modes:
        raise ValueError(f"x has {x.ndim} modes, model expects {n_modes}")
    if not 0 <= free_mode < n_modes:
        raise ValueError(f"free_mode {free_mode} out of range for order {n_modes}")
    require_nonnegative(x, "x")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be >= 1, got {max_iterations}")
    for k in range(n_modes):
        if k != free_mode and x.shape[k] != model.factors[k].shape[0]:
            raise ValueError(
                f"x mode {k} has size {x.shape[k]}, model factor expects "
                f"{model.factors[k].shape[0]}"
            )

    core = model.core
    rank = core.shape[free_mode]
    core_unf = unfold(core, free_mode)
    # Both GEMM operands below are constant across iterations.
    num = unfold(_contract_all_but(x, model.factors, skip=free_mode), free_mode) @ core_unf.T
    grams = [f.T @ f for f in model.factors]
    gram_z = unfold(_gram_weighted_core(core, grams, free_mode), free_mode) @ core_unf.T

    norm_x_sq = frobenius_norm(x) ** 2
    # Start at c * num, the best scalar multiple of the (non-negative)
    # numerator direction; scales linearly with x, so the projection of a
    # scaled tensor is the scaled projection.
    denom0 = float(np.sum((num.T @ num) * gram_z))
    b = (float(np.sum(num * num)) / denom0) * num if denom0 > 0 else np.zeros_like(num)
    prev = None
    for _ in range(max_iterations):
        b *= num / np.maximum(b @ gram_z, EPS_DIV)
        obj_sq = norm_x_sq - 2.0 * float(np.sum(b * num)) + float(
            np.sum((b.T @ b) * gram_z)
        )
        obj = math.sqrt(max(obj_sq, 0.0))
        if obj == 0.0:
            break
        if prev is not None and prev - obj < tolerance * prev:
            break
        prev = obj
    return b


def explained_variance(x, model: TuckerModel) -> float:
    """Fraction of the variance of `x` captured by the model, in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    expected = tuple(f.shape[0] for f in model.factors)
    if x.shape != expected:
        raise ValueError(f"x has shape {x.shape}, model reconstructs {expected}")
    residual = frobenius_norm(x - reconstruct(model.core, model.factors))
    norm_x = frobenius_norm(x)
    if norm_x == 0.0:
        if residual == 0.0:
            return 1.0
        raise ValueError("x has zero norm but the model reconstruction does not")
    ratio = residual / norm_x
    return min(1.0, max(0.0, 1.0 - ratio * ratio))


def save_model(model: TuckerModel, directory) -> Path:
    """Persist a model as a directory: core.ntf, factor_<k>.ntf, metadata.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_tensor(directory / "core.ntf", model.core)
    for k, factor in enumerate(model.factors):
        write_tensor(directory / f"factor_{k}.ntf", factor)
    lines = [
        f"modes: {len(model.factors)}",
        f"ranks: {','.join(str(r) for r in model.ranks)}",
        f"final_error: {model.final_error!r}",
        f"explained_variance: {model.explained_variance!r}",
        f"seed: {model.seed}",
        f"iterations: {model.n_iterations}",
    ]
    _atomic_write_text(directory / "metadata.txt", "\n".join(lines) + "\n")
    return directory


def load_model(directory) -> TuckerModel:
    """Load a model saved by :func:`save_model`.

    The per-sweep objective history is not persisted; loaded models carry
    an empty history.
    """
    directory = Path(directory)
    meta_path = directory / "metadata.txt"
    if not meta_path.is_file():
        raise ValueError(f"{directory}: not a saved model (missing metadata.txt)")
    meta = {}
    for line_no, line in enumerate(meta_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if ":" not in line:
            raise ValueError(f"{meta_path}:{line_no}: malformed metadata line {line!r}")
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()
    try:
        n_modes = int(meta["modes"])
        ranks = tuple(int(r) for r in meta["ranks"].split(","))
        final_error = float(meta["final_error"])
        ev = float(meta["explained_variance"])
        seed = int(meta["seed"])
        iterations = int(meta["iterations"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{meta_path}: incomplete or malformed metadata ({exc})") from exc
    core = read_tensor(directory / "core.ntf")
    if core.shape != ranks:
        raise ValueError(
            f"{directory}: core shape {core.shape} disagrees with metadata ranks {ranks}"
        )
    factors = [read_tensor(directory / f"factor_{k}.ntf") for k in range(n_modes)]
    for k, factor in enumerate(factors):
        if factor.ndim != 2 or factor.shape[1] != ranks[k]:
            raise ValueError(f"{directory}: factor_{k}.ntf does not match ranks {ranks}")
    return TuckerModel(core, factors, final_error, ev, np.empty(0), iterations, seed)
