"""creditbench: benchmarking toolkit for credit-default classification
under class imbalance."""

__version__ = "0.1.0"

from .data import ColumnSchema, SplitIndices, TabularDataset, load_csv, save_csv, stratified_split, stratified_subset
from .metrics import ConfusionMatrix, MetricSet, accuracy, auc, brier, cohen_kappa, evaluate_cell, h_measure, ks_statistic
from .models import FittedModel, ModelSpec, fit, load_model, save_model, score
from .resample import ResampledSet, SamplerConfig, apply_sampler
from .thresholds import Threshold, calibrate_threshold, predict_labels

__all__ = [
    "__version__",
    "ColumnSchema", "SplitIndices", "TabularDataset", "load_csv", "save_csv",
    "stratified_split", "stratified_subset",
    "ConfusionMatrix", "MetricSet", "accuracy", "auc", "brier", "cohen_kappa",
    "evaluate_cell", "h_measure", "ks_statistic",
    "FittedModel", "ModelSpec", "fit", "score", "save_model", "load_model",
    "ResampledSet", "SamplerConfig", "apply_sampler",
    "Threshold", "calibrate_threshold", "predict_labels",
]
