"""End-to-end pipelines and the Tucker-vs-NMF comparison experiment.

Both pipelines score one subject and one degree of freedom: repetitions
are split stratified by movement, the classifier trains on repetition
features, and the reported number is the test error rate.  The tensor
pipeline fits one Tucker model to the stacked training scalograms and
projects test repetitions onto its frozen factors; the baseline fits a
rank-1 NMF to every repetition independently and classifies its spatial
synergy vector.

Training never reads test repetitions: the split happens first and the
model-fitting functions only ever see the training side.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classify import SplitPlan, error_rate, knn_fit, knn_predict, split
from .data import DIRECTIONS, Dataset, MovementLabel
from .nmf import FitOptions, nmf_synergy_feature
from .ntf import _atomic_write_text
from .tfa import WaveletSpec, tensorize_epochs
from .tucker import TuckerModel, ntd, project

METHODS = ("tucker", "nmf")
_METHOD_NAMES = {"tucker": "Tucker3", "nmf": "NMF"}

# Purpose tags mixed into derived seeds so no two stages share a stream.
_ROLE_SPLIT = 0
_ROLE_NTD = 1
_ROLE_NMF = 2


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic child seed from a master seed and integer keys."""
    seq = np.random.SeedSequence([int(master), *(int(k) for k in keys)])
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by both pipelines."""

    wavelet: WaveletSpec = field(default_factory=WaveletSpec)
    ranks: tuple[int, ...] = (2, 2, 2, 2)
    fit: FitOptions = field(default_factory=FitOptions)
    split: SplitPlan = field(default_factory=SplitPlan)
    k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.ranks) != 4:
            raise ValueError(f"ranks must cover 4 tensor modes, got {self.ranks}")


def _movement_pair(dof: int) -> tuple[MovementLabel, MovementLabel]:
    return MovementLabel(dof, "positive"), MovementLabel(dof, "negative")


def _resolve_subject(dataset: Dataset, subject):
    subjects = dataset.subjects()
    if subject is None:
        if len(subjects) != 1:
            raise ValueError(
                f"dataset spans subjects {subjects}; pass subject explicitly"
            )
        return subjects[0]
    if subject not in subjects:
        raise ValueError(f"subject {subject} not in dataset (has {subjects})")
    return subject


def split_epochs(dataset: Dataset, dof: int, cfg: ExperimentConfig, subject=None):
    """Stratified train/test epochs for one subject and DoF.

    Returns (train, test) epoch lists, each ordered positive repetitions
    first, then negative, ascending repetition within a movement.
    """
    subject = _resolve_subject(dataset, subject)
    pos, neg = _movement_pair(dof)
    by_label = {}
    for label in (pos, neg):
        epochs = dataset.epochs_for(subject=subject, label=label)
        if not epochs:
            raise ValueError(f"subject {subject} has no {label.name} epochs")
        reps = [e.repetition for e in epochs]
        if len(set(reps)) != len(reps):
            raise ValueError(f"subject {subject} has duplicate {label.name} repetitions")
        by_label[label] = epochs
    counts = {len(v) for v in by_label.values()}
    if len(counts) != 1:
        raise ValueError(
            f"subject {subject} DoF {dof}: movements need equal repetition counts"
        )
    n_reps = counts.pop()
    assignment = split(
        (pos, neg), n_reps, cfg.split, derive_seed(cfg.seed, _ROLE_SPLIT, subject, dof)
    )
    train = [by_label[lab][i] for lab in (pos, neg) for i in assignment[lab][0]]
    test = [by_label[lab][i] for lab in (pos, neg) for i in assignment[lab][1]]
    return train, test


def train_tucker(train_epochs, cfg: ExperimentConfig, seed: int):
    """Fit the Tucker model on training epochs only.

    Returns (model, features, labels): features are the rows of the
    repetition-mode factor, one per training epoch.
    """
    trial = tensorize_epochs(train_epochs, cfg.wavelet)
    model = ntd(trial.tensor, cfg.ranks, replace(cfg.fit, seed=seed))
    return model, model.factors[-1].copy(), trial.labels


def tucker_test_features(model: TuckerModel, test_epochs, cfg: ExperimentConfig):
    """Project test epochs onto a trained model's frozen factors.

    Returns (features, labels), one row per test epoch.
    """
    trial = tensorize_epochs(test_epochs, cfg.wavelet)
    features = project(
        trial.tensor,
        model,
        free_mode=trial.tensor.ndim - 1,
        tolerance=cfg.fit.tolerance,
    )
    return features, trial.labels


def nmf_features(epochs, cfg: ExperimentConfig, subject: int, dof: int):
    """Rank-1 NMF spatial feature per epoch, seeded per epoch identity."""
    rows = []
    labels = []
    for epoch in epochs:
        seed = derive_seed(
            cfg.seed,
            _ROLE_NMF,
            subject,
            dof,
            DIRECTIONS.index(epoch.label.direction),
            epoch.repetition,
        )
        rows.append(nmf_synergy_feature(epoch.envelope, replace(cfg.fit, seed=seed)))
        labels.append(epoch.label)
    return np.asarray(rows), tuple(labels)


def run_tucker_pipeline(
    dataset: Dataset, dof: int, cfg: ExperimentConfig | None = None, subject=None
) -> float:
    """Tensor pipeline test error rate for one subject and DoF."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    subject = _resolve_subject(dataset, subject)
    train, test = split_epochs(dataset, dof, cfg, subject)
    model, features, labels = train_tucker(
        train, cfg, derive_seed(cfg.seed, _ROLE_NTD, subject, dof)
    )
    knn = knn_fit(features, labels, cfg.k)
    test_features, test_labels = tucker_test_features(model, test, cfg)
    predictions = [knn_predict(knn, row) for row in test_features]
    return error_rate(predictions, test_labels)


def run_nmf_pipeline(
    dataset: Dataset, dof: int, cfg: ExperimentConfig | None = None, subject=None
) -> float:
    """Baseline pipeline test error rate for one subject and DoF.

    Uses the same repetition split as the tensor pipeline for a like-for-
    like comparison.
    """
    cfg = cfg if cfg is not None else ExperimentConfig()
    subject = _resolve_subject(dataset, subject)
    train, test = split_epochs(dataset, dof, cfg, subject)
    features, labels = nmf_features(train, cfg, subject, dof)
    knn = knn_fit(features, labels, cfg.k)
    test_features, test_labels = nmf_features(test, cfg, subject, dof)
    predictions = [knn_predict(knn, row) for row in test_features]
    return error_rate(predictions, test_labels)


_PIPELINES = {"tucker": run_tucker_pipeline, "nmf": run_nmf_pipeline}


@dataclass(frozen=True)
class ReportEntry:
    subject: int
    dof: int
    method: str
    error_rate: float


@dataclass
class ExperimentReport:
    """Per-subject results plus config and run metadata.

    Wall-clock timings live only in `metadata`; the CSV and summary text
    are pure functions of the entries, so repeated runs of the same
    configuration write byte-identical files.
    """

    entries: list[ReportEntry]
    config: ExperimentConfig
    metadata: dict

    def methods(self) -> tuple[str, ...]:
        seen = []
        for e in self.entries:
            if e.method not in seen:
                seen.append(e.method)
        return tuple(seen)

    def dofs(self) -> tuple[int, ...]:
        return tuple(sorted({e.dof for e in self.entries}))

    def subjects(self) -> tuple[int, ...]:
        return tuple(sorted({e.subject for e in self.entries}))

    def average(self, method: str, dof: int | None = None) -> float:
        """Mean error rate over subjects (and over DoFs when dof is None)."""
        rates = [
            e.error_rate
            for e in self.entries
            if e.method == method and (dof is None or e.dof == dof)
        ]
        if not rates:
            raise ValueError(f"no entries for method {method!r}, dof {dof}")
        return sum(rates) / len(rates)

    def averages(self) -> dict[tuple[str, int], float]:
        return {
            (method, dof): self.average(method, dof)
            for method in self.methods()
            for dof in self.dofs()
        }

    def write_csv(self, path) -> Path:
        """Write subject,dof,method,error_rate rows (atomically)."""
        lines = ["subject,dof,method,error_rate"]
        for e in self.entries:
            lines.append(f"{e.subject},{e.dof},{e.method},{e.error_rate!r}")
        path = Path(path)
        _atomic_write_text(path, "\n".join(lines) + "\n")
        return path

    def summary_table(self) -> str:
        """Plain-text table of average error rates per method and DoF."""
        dofs = self.dofs()
        n_subjects = len(self.subjects())
        noun = "subject" if n_subjects == 1 else "subjects"
        lines = [f"Average classification error rate across {n_subjects} {noun}", ""]
        header = ["method".ljust(10)] + [f"DoF{d}".rjust(9) for d in dofs]
        lines.append("".join(header))
        for method in self.methods():
            row = [_METHOD_NAMES.get(method, method).ljust(10)]
            for dof in dofs:
                row.append(f"{100.0 * self.average(method, dof):.3f}%".rjust(9))
            lines.append("".join(row))
        return "\n".join(lines) + "\n"


def run_comparison(
    dataset: Dataset,
    cfg: ExperimentConfig | None = None,
    dofs=(1, 2, 3),
    methods=METHODS,
) -> ExperimentReport:
    """Score every subject in the dataset on each DoF with each method."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    dofs = tuple(dofs)
    methods = tuple(methods)
    if not dofs:
        raise ValueError("need at least one DoF")
    for method in methods:
        if method not in _PIPELINES:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if not methods:
        raise ValueError("need at least one method")
    entries = []
    timings = {}
    for subject in dataset.subjects():
        for dof in dofs:
            for method in methods:
                started = time.perf_counter()
                rate = _PIPELINES[method](dataset, dof, cfg, subject)
                timings[f"subject{subject}_dof{dof}_{method}"] = (
                    time.perf_counter() - started
                )
                entries.append(ReportEntry(subject, dof, method, rate))
    metadata = {
        "seed": cfg.seed,
        "n_subjects": len(dataset.subjects()),
        "timings_seconds": timings,
    }
    return ExperimentReport(entries, cfg, metadata)
