"""Labels, epochs, the synthetic generator, and dataset CSV round-trips."""

import numpy as np
import pytest

from synergy_tensor import (
    DIRECTIONS,
    DOF_MOVEMENTS,
    Dataset,
    EmgEpoch,
    MovementLabel,
    MovementSpec,
    ParseError,
    SynthSpec,
    ValidationError,
    generate,
    load_csv,
    movement_set,
    save_csv,
)


def test_movement_label_roundtrip_and_ordering():
    label = MovementLabel(2, "negative")
    assert label.name == "dof2_negative"
    assert MovementLabel.parse(label.name) == label
    assert label.movement == "ulnar deviation"
    assert MovementLabel(1, "positive").sort_key < MovementLabel(1, "negative").sort_key
    assert MovementLabel(1, "negative").sort_key < MovementLabel(2, "positive").sort_key


def test_movement_label_validation():
    with pytest.raises(ValueError):
        MovementLabel(4, "positive")
    with pytest.raises(ValueError):
        MovementLabel(1, "up")
    with pytest.raises(ValueError):
        MovementLabel.parse("flexion")


def test_epoch_validation():
    label = MovementLabel(1, "positive")
    with pytest.raises(ValueError, match="non-negative"):
        EmgEpoch(np.array([[-1.0, 0.0]]), 100.0, label, 0, 0)
    with pytest.raises(ValueError, match="finite"):
        EmgEpoch(np.array([[np.inf, 0.0]]), 100.0, label, 0, 0)
    with pytest.raises(ValueError, match="2-D"):
        EmgEpoch(np.zeros(5), 100.0, label, 0, 0)
    with pytest.raises(ValueError, match="sample_rate"):
        EmgEpoch(np.zeros((2, 5)), -1.0, label, 0, 0)
    epoch = EmgEpoch(np.zeros((2, 5)), 100.0, label, 0, 0)
    assert epoch.channels == 2
    assert epoch.n_samples == 5


def test_dataset_consistency_checks():
    label = MovementLabel(1, "positive")
    a = EmgEpoch(np.zeros((2, 5)), 100.0, label, 0, 0)
    b = EmgEpoch(np.zeros((3, 5)), 100.0, label, 0, 1)
    with pytest.raises(ValueError, match="channel"):
        Dataset([a, b])
    c = EmgEpoch(np.zeros((2, 5)), 200.0, label, 0, 1)
    with pytest.raises(ValueError, match="sample rate"):
        Dataset([a, c])
    with pytest.raises(ValueError, match="at least one"):
        Dataset([])


def test_epochs_for_filters_and_sorts():
    rng = np.random.default_rng(0)
    epochs = []
    for subject in (1, 0):
        for dof in (2, 1):
            for direction in DIRECTIONS:
                for rep in (1, 0):
                    epochs.append(
                        EmgEpoch(
                            rng.random((2, 4)),
                            100.0,
                            MovementLabel(dof, direction),
                            subject,
                            rep,
                        )
                    )
    ds = Dataset(epochs)
    assert ds.subjects() == [0, 1]
    picked = ds.epochs_for(subject=0, dof=1)
    assert [(e.label.direction, e.repetition) for e in picked] == [
        ("positive", 0),
        ("positive", 1),
        ("negative", 0),
        ("negative", 1),
    ]
    only = ds.epochs_for(subject=1, label=MovementLabel(2, "negative"))
    assert all(
        e.subject == 1 and e.label == MovementLabel(2, "negative") for e in only
    )
    assert len(only) == 2


def test_movement_set_variants():
    for variant in ("default", "spectral-only", "identical"):
        specs = movement_set(10, variant)
        assert len(specs) == 6
        assert [s.label.name for s in specs] == [
            f"dof{d}_{direction}"
            for d in sorted(DOF_MOVEMENTS)
            for direction in DIRECTIONS
        ]
        for s in specs:
            assert np.linalg.norm(s.spatial) == pytest.approx(1.0)
            lo, hi = s.carrier_band
            assert 0 < lo <= hi

    by_label = {s.label: s for s in movement_set(10, "spectral-only")}
    for dof in (1, 2, 3):
        pos = by_label[MovementLabel(dof, "positive")]
        neg = by_label[MovementLabel(dof, "negative")]
        # same place, different rhythm
        assert np.array_equal(pos.spatial, neg.spatial)
        assert pos.carrier_band != neg.carrier_band

    by_label = {s.label: s for s in movement_set(10, "identical")}
    for dof in (1, 2, 3):
        pos = by_label[MovementLabel(dof, "positive")]
        neg = by_label[MovementLabel(dof, "negative")]
        assert np.array_equal(pos.spatial, neg.spatial)
        assert pos.carrier_band == neg.carrier_band

    by_label = {s.label: s for s in movement_set(10, "default")}
    for dof in (1, 2, 3):
        pos = by_label[MovementLabel(dof, "positive")]
        neg = by_label[MovementLabel(dof, "negative")]
        assert not np.array_equal(pos.spatial, neg.spatial)
        assert pos.carrier_band != neg.carrier_band

    with pytest.raises(ValueError, match="variant"):
        movement_set(10, "other")


def low_band_movements(channels):
    """Movement set whose carriers fit under low Nyquist rates (< 10 Hz)."""
    specs = []
    for k, dof in enumerate(sorted(DOF_MOVEMENTS)):
        for j, direction in enumerate(DIRECTIONS):
            spatial = np.zeros(channels)
            spatial[(2 * k + j) % channels] = 1.0
            band = (2.0 + k, 2.5 + k + 0.5 * j)
            specs.append(MovementSpec(MovementLabel(dof, direction), spatial, band))
    return tuple(specs)


def test_movement_spec_validation():
    label = MovementLabel(1, "positive")
    with pytest.raises(ValueError, match="unit"):
        MovementSpec(label, np.array([1.0, 1.0]), (1.0, 2.0))
    with pytest.raises(ValueError, match="non-negative"):
        MovementSpec(label, np.array([-1.0, 0.0]), (1.0, 2.0))
    with pytest.raises(ValueError, match="carrier_band"):
        MovementSpec(label, np.array([1.0, 0.0]), (2.0, 1.0))


def test_generate_shapes_and_determinism():
    spec = SynthSpec(
        channels=4,
        sample_rate=50.0,
        epoch_seconds=1.0,
        repetitions_per_movement=3,
        n_subjects=2,
        seed=7,
        movements=low_band_movements(4),
    )
    ds = generate(spec)
    assert len(ds.epochs) == 2 * 6 * 3
    assert ds.channels == 4
    assert ds.sample_rate == 50.0
    for epoch in ds.epochs:
        assert epoch.envelope.shape == (4, 50)
        assert np.all(epoch.envelope >= 0)
    again = generate(spec)
    for a, b in zip(ds.epochs, again.epochs):
        assert a == b


def test_generate_epochs_differ_across_repetitions_and_seeds():
    spec = SynthSpec(channels=3, epoch_seconds=1.0, repetitions_per_movement=2, seed=0)
    ds = generate(spec)
    first = ds.epochs_for(label=MovementLabel(1, "positive"))
    assert not np.array_equal(first[0].envelope, first[1].envelope)
    other = generate(SynthSpec(channels=3, epoch_seconds=1.0, repetitions_per_movement=2, seed=1))
    assert not np.array_equal(
        first[0].envelope,
        other.epochs_for(label=MovementLabel(1, "positive"))[0].envelope,
    )


def test_generate_noise_free_epochs_follow_planted_structure():
    movements = movement_set(5, "default")
    spec = SynthSpec(
        channels=5,
        epoch_seconds=1.0,
        repetitions_per_movement=1,
        noise_level=0.0,
        movements=movements,
    )
    ds = generate(spec)
    by_label = {m.label: m for m in movements}
    for epoch in ds.epochs:
        envelope = epoch.envelope
        # rank one in space: every sample column is a multiple of spatial
        spatial = by_label[epoch.label].spatial
        active = envelope.sum(axis=0) > 0
        assert active.any()
        cols = envelope[:, active] / envelope[:, active].sum(axis=0, keepdims=True)
        np.testing.assert_allclose(
            cols, (spatial / spatial.sum())[:, None] * np.ones(active.sum()), atol=1e-12
        )
        # silent outside the central activation window
        n = epoch.n_samples
        assert np.all(envelope[:, : int(0.15 * n)] == 0)
        assert np.all(envelope[:, int(0.85 * n) :] == 0)


def test_generate_validation():
    with pytest.raises(ValueError, match="Nyquist"):
        generate(SynthSpec(sample_rate=20.0))
    movements = movement_set(3, "default")
    with pytest.raises(ValueError, match="spatial weights"):
        generate(SynthSpec(channels=4, movements=movements))
    with pytest.raises(ValueError, match="modulation_depth"):
        SynthSpec(modulation_depth=1.0)


def test_csv_roundtrip_is_exact(tmp_path):
    spec = SynthSpec(
        channels=3,
        sample_rate=40.0,
        epoch_seconds=0.5,
        repetitions_per_movement=2,
        n_subjects=2,
        seed=3,
        movements=low_band_movements(3),
    )
    ds = generate(spec)
    root = save_csv(ds, tmp_path / "data")
    assert sorted(p.name for p in root.iterdir()) == ["subject_0", "subject_1"]
    files = sorted((root / "subject_0").glob("*.csv"))
    assert files[0].name == "dof1_negative_rep0.csv"
    back = load_csv(root)
    assert back.sample_rate == ds.sample_rate
    assert len(back.epochs) == len(ds.epochs)
    originals = {
        (e.subject, e.label, e.repetition): e for e in ds.epochs
    }
    for epoch in back.epochs:
        original = originals[(epoch.subject, epoch.label, epoch.repetition)]
        assert epoch == original


def test_csv_header_format(tmp_path):
    ds = generate(SynthSpec(channels=2, epoch_seconds=0.5, sample_rate=40.0,
                            repetitions_per_movement=1,
                            movements=low_band_movements(2)))
    root = save_csv(ds, tmp_path)
    path = root / "subject_0" / "dof1_positive_rep0.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "time,ch1,ch2,dof,direction,repetition,subject"
    first = lines[1].split(",")
    assert first[0] == "0.0"
    assert first[-4:] == ["1", "positive", "0", "0"]


def test_load_rejects_malformed_files(tmp_path):
    ds = generate(SynthSpec(channels=2, epoch_seconds=0.5, sample_rate=40.0,
                            repetitions_per_movement=1,
                            movements=low_band_movements(2)))
    root = save_csv(ds, tmp_path)
    path = root / "subject_0" / "dof1_positive_rep0.csv"
    original = path.read_text()

    path.write_text("bogus,header\n1,2\n")
    with pytest.raises(ParseError, match=":1"):
        load_csv(root)

    lines = original.splitlines()
    lines[2] = lines[2].replace(",", ";", 1)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match=":3"):
        load_csv(root)

    lines = original.splitlines()
    fields = lines[1].split(",")
    fields[1] = "abc"
    lines[1] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="non-numeric"):
        load_csv(root)

    path.write_text(lines[0] + "\n")
    with pytest.raises(ParseError, match="no sample rows"):
        load_csv(root)


def test_load_rejects_negative_envelope(tmp_path):
    ds = generate(SynthSpec(channels=2, epoch_seconds=0.5, sample_rate=40.0,
                            repetitions_per_movement=1,
                            movements=low_band_movements(2)))
    root = save_csv(ds, tmp_path)
    path = root / "subject_0" / "dof1_positive_rep0.csv"
    lines = path.read_text().splitlines()
    fields = lines[1].split(",")
    fields[1] = "-0.5"
    lines[1] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="negative"):
        load_csv(root)


def test_load_rejects_label_changes_mid_file(tmp_path):
    ds = generate(SynthSpec(channels=2, epoch_seconds=0.5, sample_rate=40.0,
                            repetitions_per_movement=1,
                            movements=low_band_movements(2)))
    root = save_csv(ds, tmp_path)
    path = root / "subject_0" / "dof1_positive_rep0.csv"
    lines = path.read_text().splitlines()
    fields = lines[2].split(",")
    fields[-4] = "2"
    lines[2] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="mid-file"):
        load_csv(root)


def test_load_recovers_exact_sample_rate(tmp_path):
    # 1/(1/30) does not round-trip through float division exactly; the
    # loader snaps it back.
    ds = generate(SynthSpec(channels=2, sample_rate=30.0, epoch_seconds=0.5,
                            repetitions_per_movement=1,
                            movements=low_band_movements(2)))
    back = load_csv(save_csv(ds, tmp_path))
    assert back.sample_rate == 30.0


def test_load_missing_directory(tmp_path):
    with pytest.raises(ValueError, match="not a directory"):
        load_csv(tmp_path / "nope")
    (tmp_path / "empty").mkdir()
    with pytest.raises(ValueError, match="no epoch files"):
        load_csv(tmp_path / "empty")
