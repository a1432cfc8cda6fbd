"""Repetition splitting and k-nearest-neighbour classification."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .data import DIRECTIONS, MovementLabel


@dataclass(frozen=True)
class SplitPlan:
    """Stratified train/test split by repetition."""

    train_fraction: float = 0.6

    def __post_init__(self):
        if not (np.isfinite(self.train_fraction) and 0 < self.train_fraction <= 1):
            raise ValueError(
                f"train_fraction must lie in (0, 1], got {self.train_fraction}"
            )


def split(movements, n_repetitions: int, plan: SplitPlan | None = None, seed: int = 0):
    """Partition repetition indices 0..n_repetitions-1 per movement.

    Returns {label: (train_indices, test_indices)} with both sides sorted.
    The permutation stream is seeded per movement, so the result does not
    depend on the order the movements are listed in. Raises if either side
    of the split would be empty.
    """
    plan = plan if plan is not None else SplitPlan()
    movements = list(movements)
    if not movements:
        raise ValueError("need at least one movement")
    if len(set(movements)) != len(movements):
        raise ValueError("movement labels must be unique")
    if n_repetitions < 2:
        raise ValueError(f"need at least 2 repetitions to split, got {n_repetitions}")
    n_train = int(math.floor(plan.train_fraction * n_repetitions + 0.5))
    if n_train < 1:
        raise ValueError(
            f"train_fraction {plan.train_fraction} leaves no training repetitions"
        )
    if n_train >= n_repetitions:
        raise ValueError(
            f"train_fraction {plan.train_fraction} leaves no test repetitions"
        )
    assignment = {}
    for label in movements:
        rng = np.random.default_rng(
            np.random.SeedSequence(
                [int(seed), label.dof, DIRECTIONS.index(label.direction)]
            )
        )
        perm = rng.permutation(n_repetitions)
        train = tuple(sorted(int(i) for i in perm[:n_train]))
        test = tuple(sorted(int(i) for i in perm[n_train:]))
        assignment[label] = (train, test)
    return assignment


@dataclass(frozen=True)
class KnnModel:
    """Stored training points for k-NN prediction."""

    features: np.ndarray
    labels: tuple[MovementLabel, ...]
    k: int


def knn_fit(features, labels, k: int = 3) -> KnnModel:
    """Store training features (points x dimensions) and their labels."""
    try:
        f = np.asarray(features, dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"features must form a rectangular array ({exc})") from None
    if f.ndim != 2:
        raise ValueError(f"features must be 2-D (points x dimensions), got {f.ndim}-D")
    if not np.all(np.isfinite(f)):
        raise ValueError("features must contain only finite values")
    labels = tuple(labels)
    if len(labels) != f.shape[0]:
        raise ValueError(f"{f.shape[0]} feature rows but {len(labels)} labels")
    if not 1 <= k <= f.shape[0]:
        raise ValueError(f"k must lie in 1..{f.shape[0]}, got {k}")
    return KnnModel(f.copy(), labels, int(k))


def knn_predict(model: KnnModel, query) -> MovementLabel:
    """Majority vote among the k nearest stored points (Euclidean).

    Exact distance ties resolve to the lower stored index; a tied vote
    resolves to the nearest neighbour whose label is among the leaders.
    """
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != model.features.shape[1]:
        raise ValueError(
            f"query must be 1-D of length {model.features.shape[1]}, "
            f"got shape {q.shape}"
        )
    if not np.all(np.isfinite(q)):
        raise ValueError("query must contain only finite values")
    distances = np.sqrt(((model.features - q[None, :]) ** 2).sum(axis=1))
    order = np.argsort(distances, kind="stable")[: model.k]
    votes = Counter(model.labels[i] for i in order)
    top = max(votes.values())
    leaders = {label for label, count in votes.items() if count == top}
    if len(leaders) == 1:
        return next(iter(leaders))
    for i in order:
        if model.labels[i] in leaders:
            return model.labels[i]
    raise AssertionError("unreachable: leaders drawn from the same neighbours")


def error_rate(predictions, truth) -> float:
    """Fraction of mismatched labels."""
    predictions = list(predictions)
    truth = list(truth)
    if len(predictions) != len(truth):
        raise ValueError(
            f"{len(predictions)} predictions for {len(truth)} true labels"
        )
    if not truth:
        raise ValueError("need at least one labelled point")
    wrong = sum(1 for p, t in zip(predictions, truth) if p != t)
    return wrong / len(truth)
