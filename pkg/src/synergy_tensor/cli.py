"""Command-line interface: synth, tensorize, decompose, classify, benchmark.

Every subcommand accepts --config pointing at a JSON file whose keys match
the long flag names (underscored); the SYNERGY_TENSOR_CONFIG environment
variable names a default config file.  Explicit flags override the file,
which overrides built-in defaults.  Unknown config keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classify import SplitPlan
from .data import (
    VARIANTS,
    Dataset,
    SynthSpec,
    generate,
    load_csv,
    movement_set,
    save_csv,
)
from .experiment import (
    METHODS,
    ExperimentConfig,
    run_comparison,
    split_epochs,
)
from .nmf import FitOptions
from .ntf import _atomic_write_text, read_tensor, write_matrix_csv, write_tensor
from .tfa import DEFAULT_QUALITY, WaveletSpec, tensorize_epochs
from .tucker import ntd, save_model

CONFIG_ENV = "SYNERGY_TENSOR_CONFIG"

# Global config schema: key -> (python type, short description).
_CONFIG_KEYS = {
    "f_min": (float, "lowest wavelet centre frequency in Hz"),
    "f_max": (float, "highest wavelet centre frequency in Hz"),
    "bins": (int, "number of wavelet frequency bins"),
    "quality": (float, "wavelet window quality factor"),
    "ranks": (list, "four Tucker mode ranks"),
    "k": (int, "nearest-neighbour count"),
    "train_fraction": (float, "fraction of repetitions used for training"),
    "seed": (int, "master random seed"),
    "max_iterations": (int, "iteration cap for the factorisations"),
    "tolerance": (float, "relative objective decrease stopping threshold"),
    "data": (str, "dataset directory"),
    "out": (str, "output directory"),
}


def load_config(path) -> dict:
    """Read and validate a JSON config file against the flag schema."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    out = {}
    for key, value in raw.items():
        if key not in _CONFIG_KEYS:
            known = ", ".join(sorted(_CONFIG_KEYS))
            raise ValueError(f"{path}: unknown config key {key!r} (known keys: {known})")
        expected, _ = _CONFIG_KEYS[key]
        if expected is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{path}: key {key!r} must be a number, got {value!r}")
            out[key] = float(value)
        elif expected is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"{path}: key {key!r} must be an integer, got {value!r}")
            out[key] = value
        elif expected is list:
            if not isinstance(value, list) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in value
            ):
                raise ValueError(
                    f"{path}: key {key!r} must be a list of integers, got {value!r}"
                )
            out[key] = tuple(value)
        else:
            if not isinstance(value, str):
                raise ValueError(f"{path}: key {key!r} must be a string, got {value!r}")
            out[key] = value
    return out


def _file_config(args) -> dict:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    return load_config(path)


def _pick(args, file_cfg: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_cfg:
        return file_cfg[key]
    return default


def _parse_ranks(value) -> tuple[int, ...]:
    if isinstance(value, tuple):
        return value
    try:
        ranks = tuple(int(r) for r in str(value).split(","))
    except ValueError:
        raise ValueError(f"ranks must be comma-separated integers, got {value!r}") from None
    return ranks


def _experiment_config(args, file_cfg: dict) -> ExperimentConfig:
    wavelet = WaveletSpec(
        f_min=_pick(args, file_cfg, "f_min", 0.5),
        f_max=_pick(args, file_cfg, "f_max", 50.0),
        n_bins=_pick(args, file_cfg, "bins", 282),
        quality=_pick(args, file_cfg, "quality", DEFAULT_QUALITY),
    )
    fit = FitOptions(
        max_iterations=_pick(args, file_cfg, "max_iterations", 500),
        tolerance=_pick(args, file_cfg, "tolerance", 1e-6),
    )
    return ExperimentConfig(
        wavelet=wavelet,
        ranks=_parse_ranks(_pick(args, file_cfg, "ranks", (2, 2, 2, 2))),
        fit=fit,
        split=SplitPlan(train_fraction=_pick(args, file_cfg, "train_fraction", 0.6)),
        k=_pick(args, file_cfg, "k", 3),
        seed=_pick(args, file_cfg, "seed", 0),
    )


def _require(args, file_cfg: dict, key: str, flag: str):
    value = _pick(args, file_cfg, key, None)
    if value is None:
        raise ValueError(f"missing required {flag} (or config key {key!r})")
    return value


def _dof_list(value) -> tuple[int, ...]:
    if value in (None, "all"):
        return (1, 2, 3)
    return (int(value),)


def _subject_list(dataset: Dataset, value) -> list[int]:
    if value in (None, "all"):
        return dataset.subjects()
    subject = int(value)
    if subject not in dataset.subjects():
        raise ValueError(f"subject {subject} not in dataset (has {dataset.subjects()})")
    return [subject]


def _write_labels_csv(path: Path, labels, subject: int) -> None:
    lines = ["slice,dof,direction,repetition,subject"]
    for k, (label, rep) in enumerate(labels):
        lines.append(f"{k},{label.dof},{label.direction},{rep},{subject}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def cmd_synth(args) -> int:
    file_cfg = _file_config(args)
    out = Path(_require(args, file_cfg, "out", "--out"))
    seed = _pick(args, file_cfg, "seed", 0)
    channels = args.channels if args.channels is not None else 10
    spec = SynthSpec(
        channels=channels,
        sample_rate=args.sample_rate if args.sample_rate is not None else 100.0,
        epoch_seconds=args.epoch_seconds if args.epoch_seconds is not None else 5.0,
        repetitions_per_movement=args.reps if args.reps is not None else 10,
        n_subjects=args.subjects if args.subjects is not None else 5,
        noise_level=args.noise if args.noise is not None else 0.05,
        modulation_depth=args.modulation_depth if args.modulation_depth is not None else 0.8,
        seed=seed,
        movements=movement_set(channels, args.variant),
    )
    dataset = generate(spec)
    save_csv(dataset, out)
    n_movements = len(spec.movements)
    print(
        f"wrote {len(dataset.epochs)} epochs to {out} "
        f"({spec.n_subjects} subjects x {n_movements} movements x "
        f"{spec.repetitions_per_movement} repetitions, {spec.channels} channels "
        f"at {spec.sample_rate:g} Hz, variant {args.variant}, seed {seed})"
    )
    return 0


def cmd_tensorize(args) -> int:
    file_cfg = _file_config(args)
    data = Path(_require(args, file_cfg, "data", "--data"))
    out = Path(_require(args, file_cfg, "out", "--out"))
    cfg = _experiment_config(args, file_cfg)
    dataset = load_csv(data)
    out.mkdir(parents=True, exist_ok=True)
    for subject in _subject_list(dataset, args.subject):
        subject_dir = out / f"subject_{subject}"
        subject_dir.mkdir(exist_ok=True)
        for dof in _dof_list(args.dof):
            if args.split == "none":
                parts = {"all": dataset.epochs_for(subject=subject, dof=dof)}
            else:
                train, test = split_epochs(dataset, dof, cfg, subject)
                parts = {}
                if args.split in ("train", "both"):
                    parts["train"] = train
                if args.split in ("test", "both"):
                    parts["test"] = test
            for part, epochs in parts.items():
                trial = tensorize_epochs(epochs, cfg.wavelet)
                tensor_path = subject_dir / f"dof{dof}_{part}.ntf"
                write_tensor(tensor_path, trial.tensor)
                _write_labels_csv(
                    subject_dir / f"dof{dof}_{part}_labels.csv",
                    [(e.label, e.repetition) for e in epochs],
                    subject,
                )
                shape = "x".join(str(s) for s in trial.tensor.shape)
                print(f"wrote {tensor_path} ({shape})")
    return 0


def cmd_decompose(args) -> int:
    file_cfg = _file_config(args)
    tensor_path = Path(_require(args, file_cfg, "data", "--input"))
    out = Path(_require(args, file_cfg, "out", "--out"))
    ranks = _parse_ranks(_pick(args, file_cfg, "ranks", (2, 2, 2, 2)))
    opts = FitOptions(
        max_iterations=_pick(args, file_cfg, "max_iterations", 500),
        tolerance=_pick(args, file_cfg, "tolerance", 1e-6),
        seed=_pick(args, file_cfg, "seed", 0),
    )
    x = read_tensor(tensor_path)
    model = ntd(x, ranks, opts)
    out.mkdir(parents=True, exist_ok=True)
    model_dir = save_model(model, out / "model")
    written = [str(model_dir)]
    for mode, factor in enumerate(model.factors):
        header = [f"component_{j + 1}" for j in range(factor.shape[1])]
        path = write_matrix_csv(out / f"factor_mode{mode}.csv", factor, header=header)
        written.append(str(path))
    from . import plots  # deferred: matplotlib import is slow

    written.append(str(plots.plot_tucker_factors(model, out / "factors.png")))
    print(
        f"decomposed {tensor_path} at ranks {','.join(str(r) for r in model.ranks)}: "
        f"explained variance {model.explained_variance:.6f} "
        f"({model.n_iterations} sweeps)"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_classify(args) -> int:
    file_cfg = _file_config(args)
    data = Path(_require(args, file_cfg, "data", "--data"))
    cfg = _experiment_config(args, file_cfg)
    dataset = load_csv(data)
    methods = METHODS if args.method == "both" else (args.method,)
    dofs = _dof_list(args.dof)
    subjects = _subject_list(dataset, args.subject)
    report = run_comparison(
        Dataset([e for e in dataset.epochs if e.subject in set(subjects)]),
        cfg,
        dofs=dofs,
        methods=methods,
    )
    for entry in report.entries:
        print(
            f"subject {entry.subject}  dof{entry.dof}  {entry.method}: "
            f"error rate {100.0 * entry.error_rate:.3f}%"
        )
    if len(subjects) > 1:
        for method in report.methods():
            for dof in report.dofs():
                print(
                    f"average   dof{dof}  {method}: "
                    f"error rate {100.0 * report.average(method, dof):.3f}%"
                )
    return 0


def cmd_benchmark(args) -> int:
    file_cfg = _file_config(args)
    data = Path(_require(args, file_cfg, "data", "--data"))
    out = Path(_require(args, file_cfg, "out", "--out"))
    cfg = _experiment_config(args, file_cfg)
    dataset = load_csv(data)
    methods = METHODS if args.method == "both" else (args.method,)
    report = run_comparison(dataset, cfg, dofs=_dof_list(args.dof), methods=methods)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = report.write_csv(out / "report.csv")
    summary = report.summary_table()
    summary_path = out / "summary.txt"
    _atomic_write_text(summary_path, summary)
    from . import plots  # deferred: matplotlib import is slow

    figure_path = plots.plot_error_rates(report, out / "error_rates.png")
    print(summary)
    for path in (csv_path, summary_path, figure_path):
        print(f"wrote {path}")
    return 0


def _int_or_all(value: str):
    if value == "all":
        return "all"
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'all', got {value!r}")


def _add_config_flag(p) -> None:
    p.add_argument(
        "--config",
        metavar="FILE",
        help=f"JSON config file; flags override it (default: ${CONFIG_ENV} if set)",
    )


def _add_wavelet_flags(p) -> None:
    p.add_argument("--bins", type=int, help="frequency bins (default: 282)")
    p.add_argument("--f-min", type=float, dest="f_min",
                   help="lowest centre frequency in Hz (default: 0.5)")
    p.add_argument("--f-max", type=float, dest="f_max",
                   help="highest centre frequency in Hz (default: 50)")
    p.add_argument("--quality", type=float,
                   help=f"window quality factor (default: {DEFAULT_QUALITY:.4f})")


def _add_fit_flags(p) -> None:
    p.add_argument("--max-iterations", type=int, dest="max_iterations",
                   help="iteration cap for the factorisations (default: 500)")
    p.add_argument("--tolerance", type=float,
                   help="relative objective decrease stop threshold (default: 1e-6)")


def _add_split_flags(p) -> None:
    p.add_argument("--train-fraction", type=float, dest="train_fraction",
                   help="fraction of repetitions used for training (default: 0.6)")


def _add_seed_flag(p) -> None:
    p.add_argument("--seed", type=int, help="master random seed (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synergy-tensor",
        description="Muscle-synergy extraction and classification on "
        "4th-order EMG scalogram tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic EMG envelope dataset")
    _add_config_flag(p)
    p.add_argument("--out", help="dataset directory to create")
    p.add_argument("--subjects", type=int, help="subject count (default: 5)")
    p.add_argument("--channels", type=int, help="EMG channels (default: 10)")
    p.add_argument("--sample-rate", type=float, dest="sample_rate",
                   help="envelope sample rate in Hz (default: 100)")
    p.add_argument("--epoch-seconds", type=float, dest="epoch_seconds",
                   help="epoch length in seconds (default: 5)")
    p.add_argument("--reps", type=int, help="repetitions per movement (default: 10)")
    p.add_argument("--noise", type=float,
                   help="noise level relative to the clean peak (default: 0.05)")
    p.add_argument("--modulation-depth", type=float, dest="modulation_depth",
                   help="carrier modulation depth in [0, 1) (default: 0.8)")
    p.add_argument("--variant", choices=VARIANTS, default="default",
                   help="planted structure: spatial+spectral (default), "
                   "spectral-only, or identical classes")
    _add_seed_flag(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tensorize", help="wavelet-transform epochs into NTF1 tensors")
    _add_config_flag(p)
    p.add_argument("--data", help="dataset directory (from synth or exported)")
    p.add_argument("--out", help="output directory for .ntf tensors")
    p.add_argument("--subject", type=_int_or_all, default="all",
                   help="subject id or 'all' (default: all)")
    p.add_argument("--dof", choices=["all", "1", "2", "3"], default="all",
                   help="degree of freedom (default: all)")
    p.add_argument("--split", choices=["train", "test", "both", "none"], default="both",
                   help="which split sides to write; 'none' stacks every "
                   "repetition into one tensor (default: both)")
    _add_wavelet_flags(p)
    _add_split_flags(p)
    _add_seed_flag(p)
    p.set_defaults(func=cmd_tensorize)

    p = sub.add_parser("decompose", help="non-negative Tucker decomposition of a tensor")
    _add_config_flag(p)
    p.add_argument("--input", dest="data", help="NTF1 tensor file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--ranks", help="comma-separated mode ranks (default: 2,2,2,2)")
    _add_fit_flags(p)
    _add_seed_flag(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("classify", help="train/test classification error per subject")
    _add_config_flag(p)
    p.add_argument("--data", help="dataset directory")
    p.add_argument("--subject", type=_int_or_all, default="all",
                   help="subject id or 'all' (default: all)")
    p.add_argument("--dof", choices=["all", "1", "2", "3"], default="all",
                   help="degree of freedom (default: all)")
    p.add_argument("--method", choices=METHODS + ("both",), default="tucker",
                   help="pipeline to score (default: tucker)")
    p.add_argument("--k", type=int, help="nearest-neighbour count (default: 3)")
    p.add_argument("--ranks", help="comma-separated mode ranks (default: 2,2,2,2)")
    _add_wavelet_flags(p)
    _add_fit_flags(p)
    _add_split_flags(p)
    _add_seed_flag(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("benchmark", help="full Tucker-vs-NMF comparison report")
    _add_config_flag(p)
    p.add_argument("--data", help="dataset directory")
    p.add_argument("--out", help="report output directory")
    p.add_argument("--method", choices=METHODS + ("both",), default="both",
                   help="methods to run (default: both)")
    p.add_argument("--dof", choices=["all", "1", "2", "3"], default="all",
                   help="degree of freedom (default: all)")
    p.add_argument("--k", type=int, help="nearest-neighbour count (default: 3)")
    p.add_argument("--ranks", help="comma-separated mode ranks (default: 2,2,2,2)")
    _add_wavelet_flags(p)
    _add_fit_flags(p)
    _add_split_flags(p)
    _add_seed_flag(p)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
