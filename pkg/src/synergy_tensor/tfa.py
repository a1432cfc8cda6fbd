"""Log-normal wavelet scalograms and tensor assembly for EMG epochs.

The transform multiplies the signal's spectrum by a bank of log-normal
windows

    W_k(f) = exp(-(q * ln(f / f_k))**2 / 2)   for f > 0, 0 otherwise,

inverts each product back to the time domain and keeps the coefficient
magnitudes.  Negative frequencies and DC are zeroed, making each band's
output analytic, so the magnitude is a smooth envelope.  Centre
frequencies f_k are log-uniformly spaced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import EmgEpoch, MovementLabel

# Default window quality q = 2*pi*0.5/sqrt(ln 2) = pi/sqrt(ln 2). The
# Gaussian log-frequency window then has full width at half maximum
# 2*sqrt(2*ln 2)/q = 2*sqrt(2)*ln(2)/pi = 0.624 natural-log units, about
# 0.90 octave, so windows centred one octave apart meet near their
# half-maximum points.
DEFAULT_QUALITY = math.pi / math.sqrt(math.log(2.0))


@dataclass(frozen=True)
class WaveletSpec:
    """Frequency grid and window width for the scalogram."""

    f_min: float = 0.5
    f_max: float = 50.0
    n_bins: int = 282
    quality: float = DEFAULT_QUALITY

    def __post_init__(self):
        if not (np.isfinite(self.f_min) and self.f_min > 0):
            raise ValueError(f"f_min must be positive, got {self.f_min}")
        if not (np.isfinite(self.f_max) and self.f_max > self.f_min):
            raise ValueError(
                f"f_max must exceed f_min ({self.f_min}), got {self.f_max}"
            )
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be >= 2, got {self.n_bins}")
        if not (np.isfinite(self.quality) and self.quality > 0):
            raise ValueError(f"quality must be positive, got {self.quality}")

    def centre_frequencies(self) -> np.ndarray:
        """Log-uniform grid from f_min to f_max inclusive."""
        return np.geomspace(self.f_min, self.f_max, self.n_bins)


@dataclass(frozen=True)
class TrialTensor:
    """Stack of per-repetition scalogram tensors with their labels.

    tensor axes: channels x samples x frequency bins x repetitions.
    labels[k] belongs to slice tensor[..., k].
    """

    tensor: np.ndarray
    labels: tuple[MovementLabel, ...]
    spec: WaveletSpec = field(default_factory=WaveletSpec)


def _scalograms(signals: np.ndarray, sample_rate: float, spec: WaveletSpec) -> np.ndarray:
    """Scalograms of a (channels x samples) batch -> (channels x samples x bins)."""
    if not (np.isfinite(sample_rate) and sample_rate > 0):
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    if signals.shape[1] < 1:
        raise ValueError("signal must contain at least one sample")
    if not np.all(np.isfinite(signals)):
        raise ValueError("signal must contain only finite values")
    nyquist = sample_rate / 2.0
    if spec.f_max > nyquist:
        raise ValueError(
            f"f_max {spec.f_max} exceeds the Nyquist frequency {nyquist}"
        )

    n = signals.shape[1]
    # Next power of two at no less than twice the signal length: the
    # frequency-domain product is a circular convolution, and the guard
    # interval keeps slow wavelets' tails from wrapping into the epoch.
    padded = 1 << (2 * n - 1).bit_length()
    freqs = np.fft.fftfreq(padded, d=1.0 / sample_rate)
    centres = spec.centre_frequencies()

    windows = np.zeros((spec.n_bins, padded))
    positive = freqs > 0
    log_ratio = np.log(freqs[positive][None, :] / centres[:, None])
    windows[:, positive] = np.exp(-0.5 * (spec.quality * log_ratio) ** 2)

    spectra = np.fft.fft(signals, n=padded, axis=1)
    coefs = np.fft.ifft(spectra[:, None, :] * windows[None, :, :], axis=2)
    return np.abs(coefs[:, :, :n]).transpose(0, 2, 1)


def lognormal_cwt(signal, sample_rate: float, spec: WaveletSpec | None = None) -> np.ndarray:
    """Magnitude scalogram of a 1-D signal -> (samples x n_bins) array."""
    spec = spec if spec is not None else WaveletSpec()
    sig = np.asarray(signal, dtype=np.float64)
    if sig.ndim != 1:
        raise ValueError(f"signal must be 1-D, got {sig.ndim}-D")
    return _scalograms(sig[None, :], sample_rate, spec)[0]


def epoch_to_tensor3(epoch: EmgEpoch, spec: WaveletSpec | None = None) -> np.ndarray:
    """Scalogram tensor of one epoch: channels x samples x frequency bins."""
    spec = spec if spec is not None else WaveletSpec()
    return _scalograms(epoch.envelope, epoch.sample_rate, spec)


def stack_repetitions(tensors, labels, spec: WaveletSpec | None = None) -> TrialTensor:
    """Stack per-repetition (channels x samples x bins) tensors along a new
    trailing repetition mode, pairing slice k with labels[k]."""
    tensors = [np.asarray(t, dtype=np.float64) for t in tensors]
    labels = tuple(labels)
    if not tensors:
        raise ValueError("need at least one repetition tensor")
    if len(tensors) != len(labels):
        raise ValueError(
            f"{len(tensors)} tensors but {len(labels)} labels"
        )
    shape = tensors[0].shape
    for k, t in enumerate(tensors):
        if t.ndim != 3:
            raise ValueError(f"repetition tensor {k} must be 3-D, got {t.ndim}-D")
        if t.shape != shape:
            raise ValueError(
                f"repetition tensor {k} has shape {t.shape}, expected {shape}"
            )
    stacked = np.stack(tensors, axis=3)
    return TrialTensor(stacked, labels, spec if spec is not None else WaveletSpec())


def tensorize_epochs(epochs, spec: WaveletSpec | None = None) -> TrialTensor:
    """Transform epochs (in the given order) and stack them into a trial
    tensor; all epochs must share channel count and sample rate."""
    spec = spec if spec is not None else WaveletSpec()
    epochs = list(epochs)
    if not epochs:
        raise ValueError("need at least one epoch")
    tensors = [epoch_to_tensor3(ep, spec) for ep in epochs]
    return stack_repetitions(tensors, [ep.label for ep in epochs], spec)
