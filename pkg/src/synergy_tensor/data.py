"""Movement labels, EMG epochs, the synthetic generator, and CSV I/O.

Datasets live on disk as one directory per subject (``subject_<id>``)
holding one CSV per epoch (``dof<k>_<direction>_rep<j>.csv``).  Each file
has the header ``time,ch1,...,chM,dof,direction,repetition,subject`` and
one row per sample.  Floats are written in shortest-round-trip form, so
envelopes survive a save/load cycle bit-exactly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DIRECTIONS = ("positive", "negative")

# Anatomical reading of each degree of freedom's positive/negative pair.
DOF_MOVEMENTS = {
    1: ("wrist flexion", "wrist extension"),
    2: ("radial deviation", "ulnar deviation"),
    3: ("forearm supination", "forearm pronation"),
}


class ParseError(ValueError):
    """Malformed dataset file: bad header, bad row, or a non-numeric cell."""


class ValidationError(ValueError):
    """Well-formed file whose content violates a constraint."""


@dataclass(frozen=True)
class MovementLabel:
    """One movement class: a degree of freedom and a direction."""

    dof: int
    direction: str

    def __post_init__(self):
        if self.dof not in DOF_MOVEMENTS:
            raise ValueError(f"dof must be one of {sorted(DOF_MOVEMENTS)}, got {self.dof}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")

    @property
    def name(self) -> str:
        return f"dof{self.dof}_{self.direction}"

    @property
    def movement(self) -> str:
        """Anatomical movement name, e.g. 'wrist flexion'."""
        return DOF_MOVEMENTS[self.dof][DIRECTIONS.index(self.direction)]

    @property
    def sort_key(self) -> tuple[int, int]:
        """Orders labels by DoF, positive before negative."""
        return (self.dof, DIRECTIONS.index(self.direction))

    @classmethod
    def parse(cls, name: str) -> "MovementLabel":
        """Inverse of .name: 'dof2_negative' -> MovementLabel(2, 'negative')."""
        parts = name.split("_")
        if len(parts) != 2 or not parts[0].startswith("dof"):
            raise ValueError(f"cannot parse movement label {name!r}")
        try:
            dof = int(parts[0][3:])
        except ValueError as exc:
            raise ValueError(f"cannot parse movement label {name!r}") from exc
        return cls(dof, parts[1])


@dataclass(frozen=True, eq=False)
class EmgEpoch:
    """One recorded repetition: a channels x samples envelope matrix."""

    envelope: np.ndarray
    sample_rate: float
    label: MovementLabel
    subject: int
    repetition: int

    def __eq__(self, other):
        if not isinstance(other, EmgEpoch):
            return NotImplemented
        return (
            np.array_equal(self.envelope, other.envelope)
            and self.sample_rate == other.sample_rate
            and self.label == other.label
            and self.subject == other.subject
            and self.repetition == other.repetition
        )

    def __post_init__(self):
        env = np.asarray(self.envelope, dtype=np.float64)
        if env.ndim != 2:
            raise ValueError(f"envelope must be 2-D, got {env.ndim}-D")
        if env.shape[0] < 1 or env.shape[1] < 1:
            raise ValueError(f"envelope must be non-empty, got shape {env.shape}")
        if not np.all(np.isfinite(env)):
            raise ValueError("envelope must contain only finite values")
        if np.any(env < 0):
            raise ValueError("envelope must be non-negative")
        object.__setattr__(self, "envelope", env)
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.subject < 0:
            raise ValueError(f"subject must be >= 0, got {self.subject}")
        if self.repetition < 0:
            raise ValueError(f"repetition must be >= 0, got {self.repetition}")

    @property
    def channels(self) -> int:
        return self.envelope.shape[0]

    @property
    def n_samples(self) -> int:
        return self.envelope.shape[1]


@dataclass
class Dataset:
    """A bag of epochs, consistent in channel count and sample rate."""

    epochs: list[EmgEpoch]

    def __post_init__(self):
        if not self.epochs:
            raise ValueError("dataset must contain at least one epoch")
        channels = {e.channels for e in self.epochs}
        if len(channels) != 1:
            raise ValueError(f"inconsistent channel counts across epochs: {sorted(channels)}")
        rates = {e.sample_rate for e in self.epochs}
        if len(rates) != 1:
            raise ValueError(f"inconsistent sample rates across epochs: {sorted(rates)}")

    @property
    def channels(self) -> int:
        return self.epochs[0].channels

    @property
    def sample_rate(self) -> float:
        return self.epochs[0].sample_rate

    def subjects(self) -> list[int]:
        return sorted({e.subject for e in self.epochs})

    def epochs_for(self, subject=None, dof=None, label=None) -> list[EmgEpoch]:
        """Filtered epochs, sorted by subject, movement, repetition."""
        picked = [
            e
            for e in self.epochs
            if (subject is None or e.subject == subject)
            and (dof is None or e.label.dof == dof)
            and (label is None or e.label == label)
        ]
        return sorted(picked, key=lambda e: (e.subject, e.label.sort_key, e.repetition))


@dataclass(frozen=True)
class MovementSpec:
    """Planted structure for one synthetic movement class."""

    label: MovementLabel
    spatial: np.ndarray  # non-negative, unit L2 norm, one weight per channel
    carrier_band: tuple[float, float]  # Hz range the carrier is drawn from

    def __post_init__(self):
        spatial = np.asarray(self.spatial, dtype=np.float64)
        if spatial.ndim != 1:
            raise ValueError("spatial must be 1-D")
        if not np.all(np.isfinite(spatial)) or np.any(spatial < 0):
            raise ValueError("spatial must be non-negative and finite")
        norm = float(np.linalg.norm(spatial))
        if not math.isclose(norm, 1.0, rel_tol=1e-8):
            raise ValueError(f"spatial must have unit L2 norm, got {norm}")
        object.__setattr__(self, "spatial", spatial)
        lo, hi = self.carrier_band
        if not (np.isfinite(lo) and np.isfinite(hi) and 0 < lo <= hi):
            raise ValueError(f"carrier_band must satisfy 0 < lo <= hi, got {self.carrier_band}")
        object.__setattr__(self, "carrier_band", (float(lo), float(hi)))


def _gaussian_bump(channels: int, centre: float, width: float = 0.8) -> np.ndarray:
    idx = np.arange(channels, dtype=np.float64)
    bump = np.exp(-0.5 * ((idx - centre) / width) ** 2)
    return bump / np.linalg.norm(bump)


# (fractional spatial centre, carrier band Hz) per movement, keyed by
# (dof, direction). Fractions are of channels-1, so layouts scale with
# the channel count.
_DEFAULT_PLAN = {
    (1, "positive"): (0.06, (3.0, 4.0)),
    (1, "negative"): (0.56, (24.0, 30.0)),
    (2, "positive"): (0.23, (6.0, 8.0)),
    (2, "negative"): (0.73, (30.0, 36.0)),
    (3, "positive"): (0.40, (10.0, 13.0)),
    (3, "negative"): (0.90, (36.0, 42.0)),
}

_SPECTRAL_ONLY_CENTRES = {1: 0.25, 2: 0.50, 3: 0.75}
_SPECTRAL_ONLY_BANDS = {"positive": (5.0, 7.0), "negative": (25.0, 32.0)}

VARIANTS = ("default", "spectral-only", "identical")


def movement_set(channels: int, variant: str = "default") -> tuple[MovementSpec, ...]:
    """Planted movement structure for the synthetic generator.

    default: each movement gets its own spatial bump and carrier band, so
    classes separate in space and frequency. spectral-only: the two
    movements of a DoF share one spatial bump and differ only in carrier
    band. identical: they share both, making the classes indistinguishable.
    """
    if channels < 1:
        raise ValueError(f"channels must be >= 1, got {channels}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    span = max(channels - 1, 1)
    specs = []
    for dof in sorted(DOF_MOVEMENTS):
        for direction in DIRECTIONS:
            if variant == "default":
                frac, band = _DEFAULT_PLAN[(dof, direction)]
            elif variant == "spectral-only":
                frac = _SPECTRAL_ONLY_CENTRES[dof]
                band = _SPECTRAL_ONLY_BANDS[direction]
            else:  # identical
                frac = _SPECTRAL_ONLY_CENTRES[dof]
                band = _SPECTRAL_ONLY_BANDS["positive"]
            specs.append(
                MovementSpec(
                    MovementLabel(dof, direction),
                    _gaussian_bump(channels, frac * span),
                    band,
                )
            )
    return tuple(specs)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic surface-EMG generator.

    movements=None selects the default movement set for the channel count.
    """

    channels: int = 10
    sample_rate: float = 100.0
    epoch_seconds: float = 5.0
    repetitions_per_movement: int = 10
    n_subjects: int = 1
    noise_level: float = 0.05
    modulation_depth: float = 0.8
    seed: int = 0
    movements: tuple[MovementSpec, ...] | None = None

    def __post_init__(self):
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not (np.isfinite(self.epoch_seconds) and self.epoch_seconds > 0):
            raise ValueError(f"epoch_seconds must be positive, got {self.epoch_seconds}")
        if self.repetitions_per_movement < 1:
            raise ValueError(
                f"repetitions_per_movement must be >= 1, got {self.repetitions_per_movement}"
            )
        if self.n_subjects < 1:
            raise ValueError(f"n_subjects must be >= 1, got {self.n_subjects}")
        if not (np.isfinite(self.noise_level) and self.noise_level >= 0):
            raise ValueError(f"noise_level must be >= 0, got {self.noise_level}")
        if not 0 <= self.modulation_depth < 1:
            raise ValueError(
                f"modulation_depth must lie in [0, 1), got {self.modulation_depth}"
            )


def _activation_profile(n_samples: int) -> np.ndarray:
    # Raised cosine over the central 60% of the epoch, zero elsewhere.
    t = np.arange(n_samples, dtype=np.float64) / max(n_samples - 1, 1)
    phase = (t - 0.2) / 0.6
    profile = np.where(
        (phase >= 0.0) & (phase <= 1.0),
        0.5 * (1.0 - np.cos(2.0 * math.pi * phase)),
        0.0,
    )
    return profile


def generate(spec: SynthSpec) -> Dataset:
    """Generate a synthetic dataset; bit-identical for identical specs.

    Each epoch is spatial[ch] * profile(t) * (1 + depth*sin(2*pi*f_c*t + phi))
    plus half-normal noise scaled to noise_level times the clean peak, with
    f_c drawn from the movement's carrier band and phi uniform per
    repetition.
    """
    movements = spec.movements
    if movements is None:
        movements = movement_set(spec.channels, "default")
    movements = tuple(movements)
    if not movements:
        raise ValueError("movement set must not be empty")
    nyquist = spec.sample_rate / 2.0
    for m in movements:
        if len(m.spatial) != spec.channels:
            raise ValueError(
                f"movement {m.label.name} has {len(m.spatial)} spatial weights "
                f"for {spec.channels} channels"
            )
        if m.carrier_band[1] >= nyquist:
            raise ValueError(
                f"movement {m.label.name} carrier band {m.carrier_band} reaches "
                f"the Nyquist frequency {nyquist}"
            )
    labels = [m.label for m in movements]
    if len(set(labels)) != len(labels):
        raise ValueError("movement labels must be unique")

    n_samples = round(spec.epoch_seconds * spec.sample_rate)
    if n_samples < 2:
        raise ValueError("epoch_seconds * sample_rate must give at least 2 samples")
    t = np.arange(n_samples, dtype=np.float64) / spec.sample_rate
    profile = _activation_profile(n_samples)

    epochs = []
    for subject in range(spec.n_subjects):
        for m_index, movement in enumerate(movements):
            for rep in range(spec.repetitions_per_movement):
                rng = np.random.default_rng(
                    np.random.SeedSequence([spec.seed, subject, m_index, rep])
                )
                carrier = rng.uniform(*movement.carrier_band)
                phi = rng.uniform(0.0, 2.0 * math.pi)
                base = profile * (
                    1.0 + spec.modulation_depth * np.sin(2.0 * math.pi * carrier * t + phi)
                )
                envelope = movement.spatial[:, None] * base[None, :]
                if spec.noise_level > 0:
                    scale = spec.noise_level * float(envelope.max())
                    envelope = envelope + scale * np.abs(
                        rng.standard_normal((spec.channels, n_samples))
                    )
                epochs.append(
                    EmgEpoch(envelope, spec.sample_rate, movement.label, subject, rep)
                )
    return Dataset(epochs)


_FIXED_COLUMNS = ("dof", "direction", "repetition", "subject")


def _epoch_filename(label: MovementLabel, repetition: int) -> str:
    return f"{label.name}_rep{repetition}.csv"


def save_csv(dataset: Dataset, root) -> Path:
    """Write one CSV per epoch under root/subject_<id>/ (see module docstring)."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    channel_names = [f"ch{c + 1}" for c in range(dataset.channels)]
    header = ["time", *channel_names, *_FIXED_COLUMNS]
    for epoch in dataset.epochs:
        subject_dir = root / f"subject_{epoch.subject}"
        subject_dir.mkdir(exist_ok=True)
        lines = [",".join(header)]
        for i in range(epoch.n_samples):
            row = [repr(i / epoch.sample_rate)]
            row.extend(repr(float(v)) for v in epoch.envelope[:, i])
            row.extend(
                [
                    str(epoch.label.dof),
                    epoch.label.direction,
                    str(epoch.repetition),
                    str(epoch.subject),
                ]
            )
            lines.append(",".join(row))
        path = subject_dir / _epoch_filename(epoch.label, epoch.repetition)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, path)
    return root


def _snap_rate(raw: float) -> float:
    # 1/dt of a written time column is off by float division round-trip
    # error; snapping to 12 significant digits recovers any realistic rate
    # (e.g. 100.0) exactly.
    return float(f"{raw:.12g}")


def _parse_epoch_csv(path: Path) -> EmgEpoch:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty file, expected a header row") from None
        if len(header) < 6 or header[0] != "time" or tuple(header[-4:]) != _FIXED_COLUMNS:
            raise ParseError(
                f"{path}:1: malformed header; expected "
                f"time,ch1..chM,dof,direction,repetition,subject"
            )
        channels = len(header) - 5
        expected_channels = [f"ch{c + 1}" for c in range(channels)]
        if header[1 : 1 + channels] != expected_channels:
            raise ParseError(f"{path}:1: channel columns must be named ch1..ch{channels}")

        times = []
        values = []
        fixed = None
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                times.append(float(row[0]))
                sample = [float(v) for v in row[1 : 1 + channels]]
                dof = int(row[1 + channels])
                repetition = int(row[3 + channels])
                subject = int(row[4 + channels])
            except ValueError as exc:
                raise ParseError(f"{path}:{line_no}: non-numeric cell ({exc})") from None
            direction = row[2 + channels]
            if direction not in DIRECTIONS:
                raise ParseError(
                    f"{path}:{line_no}: direction must be one of {DIRECTIONS}, "
                    f"got {direction!r}"
                )
            if any(v < 0 for v in sample):
                raise ValidationError(f"{path}:{line_no}: negative envelope value")
            row_fixed = (dof, direction, repetition, subject)
            if fixed is None:
                fixed = row_fixed
            elif row_fixed != fixed:
                raise ParseError(
                    f"{path}:{line_no}: label columns change mid-file "
                    f"({row_fixed} vs {fixed})"
                )
            values.append(sample)

    if not values:
        raise ParseError(f"{path}:2: no sample rows")
    if len(values) < 2:
        raise ParseError(f"{path}:2: need at least two sample rows to infer the rate")
    dt = times[1] - times[0]
    if dt <= 0:
        raise ValidationError(f"{path}:3: time column must be strictly increasing")
    sample_rate = _snap_rate(1.0 / dt)
    dof, direction, repetition, subject = fixed
    try:
        label = MovementLabel(dof, direction)
        return EmgEpoch(
            np.asarray(values, dtype=np.float64).T, sample_rate, label, subject, repetition
        )
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def load_csv(root) -> Dataset:
    """Load every subject_*/ epoch CSV under `root` into a Dataset."""
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"{root}: not a directory")
    files = sorted(root.glob("subject_*/*.csv"))
    if not files:
        raise ValueError(f"{root}: no epoch files found (expected subject_*/<epoch>.csv)")
    return Dataset([_parse_epoch_csv(f) for f in files])
