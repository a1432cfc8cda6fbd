"""Log-normal wavelet scalograms: localisation, linearity, stacking."""

import math

import numpy as np
import pytest

from synergy_tensor import (
    DEFAULT_QUALITY,
    EmgEpoch,
    MovementLabel,
    TrialTensor,
    WaveletSpec,
    epoch_to_tensor3,
    lognormal_cwt,
    stack_repetitions,
    tensorize_epochs,
)

SPEC = WaveletSpec()


def tone(freq, sample_rate=100.0, seconds=5.0, amplitude=1.0, phase=0.0):
    t = np.arange(round(seconds * sample_rate)) / sample_rate
    return amplitude * np.sin(2.0 * math.pi * freq * t + phase)


def peak_bin(scalogram):
    """Frequency bin with the greatest total magnitude over time."""
    return int(np.argmax(np.abs(scalogram).sum(axis=0)))


def test_centre_frequencies_are_log_uniform():
    centres = SPEC.centre_frequencies()
    assert centres.shape == (282,)
    assert centres[0] == pytest.approx(0.5)
    assert centres[-1] == pytest.approx(50.0)
    ratios = centres[1:] / centres[:-1]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-10)


def test_default_quality_value():
    assert DEFAULT_QUALITY == pytest.approx(math.pi / math.sqrt(math.log(2.0)))


def test_scalogram_shape_and_nonnegativity():
    sg = lognormal_cwt(tone(10.0), 100.0, SPEC)
    assert sg.shape == (500, 282)
    assert np.all(sg >= 0)
    assert np.all(np.isfinite(sg))


def test_single_tone_peaks_at_its_frequency():
    centres = SPEC.centre_frequencies()
    rng = np.random.default_rng(42)
    for _ in range(20):
        freq = float(rng.uniform(1.0, 45.0))
        sg = lognormal_cwt(tone(freq, phase=float(rng.uniform(0, 2 * math.pi))), 100.0, SPEC)
        found = peak_bin(sg)
        nearest = int(np.argmin(np.abs(centres - freq)))
        assert abs(found - nearest) <= 1, (
            f"tone {freq:.3f} Hz peaked at bin {found} "
            f"({centres[found]:.3f} Hz), nearest bin {nearest}"
        )


def test_amplitude_linearity():
    signal = tone(7.3) + 0.5 * tone(19.0, phase=1.0)
    a = lognormal_cwt(signal, 100.0, SPEC)
    b = lognormal_cwt(4.0 * signal, 100.0, SPEC)
    assert np.max(np.abs(b - 4.0 * a)) <= 1e-10 * max(1.0, float(np.max(np.abs(b))))


def test_superposition_of_spectra():
    # The transform itself is linear; magnitudes of disjoint narrowband
    # parts add near-independently at their own peaks.
    low = tone(3.0)
    high = tone(30.0)
    both = lognormal_cwt(low + high, 100.0, SPEC)
    assert {peak_bin(lognormal_cwt(low, 100.0, SPEC)),
            peak_bin(lognormal_cwt(high, 100.0, SPEC))} == {
        peak_bin(both[:, :141]),
        141 + peak_bin(both[:, 141:]),
    }


def test_zero_signal_gives_zero_scalogram():
    sg = lognormal_cwt(np.zeros(200), 50.0, WaveletSpec(f_min=0.5, f_max=20, n_bins=30))
    assert np.max(np.abs(sg)) == 0.0


def test_wavelet_spec_validation():
    with pytest.raises(ValueError, match="f_min"):
        WaveletSpec(f_min=0.0)
    with pytest.raises(ValueError, match="f_max"):
        WaveletSpec(f_min=2.0, f_max=1.0)
    with pytest.raises(ValueError, match="n_bins"):
        WaveletSpec(n_bins=1)
    with pytest.raises(ValueError, match="quality"):
        WaveletSpec(quality=-1.0)


def test_rejects_f_max_beyond_nyquist():
    with pytest.raises(ValueError, match="Nyquist"):
        lognormal_cwt(tone(5.0), 80.0, WaveletSpec(f_max=50.0))


def test_rejects_bad_signals():
    with pytest.raises(ValueError, match="1-D"):
        lognormal_cwt(np.zeros((2, 10)), 100.0, SPEC)
    with pytest.raises(ValueError, match="finite"):
        lognormal_cwt(np.array([1.0, np.nan]), 100.0, SPEC)
    with pytest.raises(ValueError, match="sample_rate"):
        lognormal_cwt(np.zeros(10), 0.0, SPEC)


def small_epoch(rng, label, repetition, channels=3, samples=40, rate=40.0):
    return EmgEpoch(
        rng.random((channels, samples)), rate, label, subject=0, repetition=repetition
    )


def test_epoch_to_tensor3_axes():
    rng = np.random.default_rng(0)
    spec = WaveletSpec(f_min=1.0, f_max=15.0, n_bins=8)
    epoch = small_epoch(rng, MovementLabel(1, "positive"), 0)
    t3 = epoch_to_tensor3(epoch, spec)
    assert t3.shape == (3, 40, 8)
    # each channel slice is that channel's scalogram transposed to
    # samples x bins
    sg = lognormal_cwt(epoch.envelope[1], 40.0, spec)
    assert np.array_equal(t3[1], sg)


def test_stack_repetitions_orders_and_labels():
    rng = np.random.default_rng(1)
    spec = WaveletSpec(f_min=1.0, f_max=15.0, n_bins=6)
    labels = [MovementLabel(1, "positive"), MovementLabel(1, "negative")]
    tensors = [rng.random((2, 10, 6)) for _ in labels]
    trial = stack_repetitions(tensors, labels, spec)
    assert isinstance(trial, TrialTensor)
    assert trial.tensor.shape == (2, 10, 6, 2)
    for k, t3 in enumerate(tensors):
        assert np.array_equal(trial.tensor[..., k], t3)
    assert trial.labels == tuple(labels)
    assert trial.spec == spec


def test_stack_repetitions_validation():
    labels = [MovementLabel(1, "positive")]
    with pytest.raises(ValueError, match="at least one"):
        stack_repetitions([], [])
    with pytest.raises(ValueError, match="labels"):
        stack_repetitions([np.zeros((1, 2, 3))], [])
    with pytest.raises(ValueError, match="3-D"):
        stack_repetitions([np.zeros((2, 3))], labels)
    with pytest.raises(ValueError, match="shape"):
        stack_repetitions(
            [np.zeros((1, 2, 3)), np.zeros((1, 2, 4))], labels * 2
        )


def test_tensorize_epochs_stacks_in_given_order():
    rng = np.random.default_rng(2)
    spec = WaveletSpec(f_min=1.0, f_max=15.0, n_bins=5)
    epochs = [
        small_epoch(rng, MovementLabel(2, "positive"), 0),
        small_epoch(rng, MovementLabel(2, "negative"), 1),
        small_epoch(rng, MovementLabel(2, "positive"), 1),
    ]
    trial = tensorize_epochs(epochs, spec)
    assert trial.tensor.shape == (3, 40, 5, 3)
    assert trial.labels == tuple(e.label for e in epochs)
    for k, epoch in enumerate(epochs):
        assert np.array_equal(trial.tensor[..., k], epoch_to_tensor3(epoch, spec))
    with pytest.raises(ValueError, match="at least one"):
        tensorize_epochs([], spec)
