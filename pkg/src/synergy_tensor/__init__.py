"""Muscle-synergy extraction on 4th-order EMG scalogram tensors.

Pipeline: multichannel EMG envelopes -> log-normal wavelet scalograms ->
channels x samples x frequencies x repetitions tensor -> non-negative
Tucker decomposition -> k-NN classification of repetition-mode loadings,
with a per-repetition rank-1 NMF baseline for comparison.
"""

from .classify import KnnModel, SplitPlan, error_rate, knn_fit, knn_predict, split
from .data import (
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
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    ReportEntry,
    derive_seed,
    nmf_features,
    run_comparison,
    run_nmf_pipeline,
    run_tucker_pipeline,
    split_epochs,
    train_tucker,
    tucker_test_features,
)
from .nmf import FitOptions, NmfModel, nmf, nmf_synergy_feature
from .ntf import export_unfolding_csv, read_tensor, write_matrix_csv, write_tensor
from .tensor_ops import fold, frobenius_norm, mode_n_product, reconstruct, unfold
from .tfa import (
    DEFAULT_QUALITY,
    TrialTensor,
    WaveletSpec,
    epoch_to_tensor3,
    lognormal_cwt,
    stack_repetitions,
    tensorize_epochs,
)
from .tucker import (
    TuckerModel,
    explained_variance,
    load_model,
    ntd,
    project,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_QUALITY",
    "DIRECTIONS",
    "DOF_MOVEMENTS",
    "Dataset",
    "EmgEpoch",
    "ExperimentConfig",
    "ExperimentReport",
    "FitOptions",
    "KnnModel",
    "MovementLabel",
    "MovementSpec",
    "NmfModel",
    "ParseError",
    "ReportEntry",
    "SplitPlan",
    "SynthSpec",
    "TrialTensor",
    "TuckerModel",
    "ValidationError",
    "WaveletSpec",
    "derive_seed",
    "epoch_to_tensor3",
    "error_rate",
    "explained_variance",
    "export_unfolding_csv",
    "fold",
    "frobenius_norm",
    "generate",
    "knn_fit",
    "knn_predict",
    "load_csv",
    "load_model",
    "lognormal_cwt",
    "mode_n_product",
    "movement_set",
    "nmf",
    "nmf_features",
    "nmf_synergy_feature",
    "ntd",
    "project",
    "read_tensor",
    "reconstruct",
    "run_comparison",
    "run_nmf_pipeline",
    "run_tucker_pipeline",
    "save_csv",
    "save_model",
    "split",
    "split_epochs",
    "stack_repetitions",
    "tensorize_epochs",
    "train_tucker",
    "tucker_test_features",
    "unfold",
    "write_matrix_csv",
    "write_tensor",
]
