"""Data-driven reconstruction of minimal Markovian embeddings.

Fits a linear memoryless model (decoder, eigenvalues, encoder) to trajectories
of density matrices, exposing rank selection, denoising, spectrum matching and
the simulators used to produce benchmark datasets.
"""

from ._core import (
    DatasetFile,
    DegenerateSpectrumError,
    DegenerateStationaryError,
    EmbeddingModel,
    FitOptions,
    GeneratedData,
    JcConfig,
    ModelRecord,
    ModelSpec,
    NoSignalError,
    SpectrumMatch,
    SpinBosonConfig,
    ThresholdConfig,
    TrainingInfo,
    TrajectoryDataset,
    add_noise,
    denoise,
    dist_dataset,
    dist_test,
    effective_env_dim,
    finite_env_channel,
    fit,
    generate_dataset,
    load_dataset,
    load_model,
    match_spectra,
    natural_rank,
    predict,
    predict_trajectory,
    save_dataset,
    save_model,
    threshold_coefficient,
)

__all__ = [
    "DatasetFile",
    "DegenerateSpectrumError",
    "DegenerateStationaryError",
    "EmbeddingModel",
    "FitOptions",
    "GeneratedData",
    "JcConfig",
    "ModelRecord",
    "ModelSpec",
    "NoSignalError",
    "SpectrumMatch",
    "SpinBosonConfig",
    "ThresholdConfig",
    "TrainingInfo",
    "TrajectoryDataset",
    "add_noise",
    "denoise",
    "dist_dataset",
    "dist_test",
    "effective_env_dim",
    "finite_env_channel",
    "fit",
    "generate_dataset",
    "load_dataset",
    "load_model",
    "match_spectra",
    "natural_rank",
    "predict",
    "predict_trajectory",
    "save_dataset",
    "save_model",
    "threshold_coefficient",
]
