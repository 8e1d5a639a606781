"""Isolation forests with axis, hyperplane and rotated-axis splits."""

from .datagen import PRESETS, LabeledDataset, SyntheticSpec, generate
from .eif import ExtendedForest, fit_eif, score_eif
from .harness import (
    ExperimentConfig,
    HeatmapGrid,
    heatmap,
    run_real_benchmark,
    run_synthetic_experiment,
)
from .iforest import ForestParams, IsolationForest, fit_iforest, score_batch, score_iforest
from .io import DatasetFile, load_csv, load_model, save_csv, save_model
from .metrics import EvalReport, auc, label_by_contamination, run_repetitions
from .rif import RotatedForest, fit_rif, score_rif, storage_footprint
from .rng import RngState
from .rotation import RotationMatrix, qr_decompose, random_rotation
from .tree import ITree, c_factor, path_length

__all__ = [
    "PRESETS", "LabeledDataset", "SyntheticSpec", "generate",
    "ExtendedForest", "fit_eif", "score_eif",
    "ExperimentConfig", "HeatmapGrid", "heatmap", "run_real_benchmark", "run_synthetic_experiment",
    "ForestParams", "IsolationForest", "fit_iforest", "score_batch", "score_iforest",
    "DatasetFile", "load_csv", "load_model", "save_csv", "save_model",
    "EvalReport", "auc", "label_by_contamination", "run_repetitions",
    "RotatedForest", "fit_rif", "score_rif", "storage_footprint",
    "RngState",
    "RotationMatrix", "qr_decompose", "random_rotation",
    "ITree", "c_factor", "path_length",
]

__version__ = "0.1.0"
