"""Non-negative matrix factorisation via Lee-Seung multiplicative updates.

Factorises a non-negative matrix X (m x n) as S @ W with S (m x r) and
W (r x n) non-negative, minimising the Frobenius objective ||X - S W||_F.
Each iteration updates W then S; both half-steps are monotone, so the
recorded objective history never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_ops import require_nonnegative

# Floor applied to multiplicative-update denominators. Keeps quotients
# finite without disturbing them at working magnitudes.
EPS_DIV = 1e-12


@dataclass(frozen=True)
class FitOptions:
    """Iteration controls shared by the matrix and tensor factorisations."""

    max_iterations: int = 500
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not (self.tolerance > 0 and np.isfinite(self.tolerance)):
            raise ValueError(f"tolerance must be a positive finite real, got {self.tolerance}")


@dataclass(frozen=True)
class NmfModel:
    """Result of :func:`nmf`.

    synergy columns carry unit L2 norm (scale lives in `weights`);
    objective_history holds ||X - S W||_F after every half-step.
    """

    synergy: np.ndarray
    weights: np.ndarray
    final_error: float
    objective_history: np.ndarray
    n_iterations: int


def _degenerate_model(m: int, n: int, rank: int) -> NmfModel:
    # All-zero input: uniform unit-norm synergies, zero weights, zero error.
    synergy = np.full((m, rank), 1.0 / np.sqrt(m))
    return NmfModel(synergy, np.zeros((rank, n)), 0.0, np.empty(0), 0)


def nmf(x, rank: int, opts: FitOptions | None = None) -> NmfModel:
    """Fit a rank-`rank` non-negative factorisation of `x`.

    Stops after `opts.max_iterations` iterations or when the relative
    objective decrease between consecutive iterations falls below
    `opts.tolerance`. Deterministic for a fixed seed.
    """
    opts = opts if opts is not None else FitOptions()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"x must be 2-D, got {x.ndim}-D")
    require_nonnegative(x, "x")
    m, n = x.shape
    if not 1 <= rank <= min(m, n):
        raise ValueError(f"rank {rank} out of range 1..{min(m, n)} for shape {x.shape}")

    norm_x = float(np.linalg.norm(x))
    if norm_x == 0.0:
        return _degenerate_model(m, n, rank)

    rng = np.random.default_rng(opts.seed)
    # 1 - random() lies in (0, 1]: strictly positive initial factors
    s = 1.0 - rng.random((m, rank))
    w = 1.0 - rng.random((rank, n))

    history = []
    prev = None
    n_iterations = 0
    for _ in range(opts.max_iterations):
        n_iterations += 1
        w *= (s.T @ x) / np.maximum(s.T @ s @ w, EPS_DIV)
        history.append(float(np.linalg.norm(x - s @ w)))
        s *= (x @ w.T) / np.maximum(s @ (w @ w.T), EPS_DIV)
        obj = float(np.linalg.norm(x - s @ w))
        history.append(obj)
        if obj == 0.0:
            break
        if prev is not None and prev - obj < opts.tolerance * prev:
            break
        prev = obj

    norms = np.linalg.norm(s, axis=0)
    pos = norms > 0
    s[:, pos] /= norms[pos]
    w[pos, :] *= norms[pos, None]
    # Collapsed components: uniform unit column, silent in the product.
    s[:, ~pos] = 1.0 / np.sqrt(m)
    w[~pos, :] = 0.0

    final_error = min(1.0, float(np.linalg.norm(x - s @ w)) / norm_x)
    return NmfModel(s, w, final_error, np.asarray(history), n_iterations)


def nmf_synergy_feature(epoch_matrix, opts: FitOptions | None = None) -> np.ndarray:
    """Rank-1 synergy vector of a channels x samples envelope matrix.

    The returned vector has unit L2 norm and length equal to the channel
    count; it is the spatial feature used by the baseline classifier.
    """
    model = nmf(epoch_matrix, 1, opts)
    return model.synergy[:, 0].copy()
