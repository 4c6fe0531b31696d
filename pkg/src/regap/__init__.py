"""Detect generated images from how their autoencoder reconstruction error reacts to edits."""

from regap.detector import AggregationRule, Calibration, Verdict, calibrate_threshold, detect_batch
from regap.metrics import MetricConfig, MetricKind, distance
from regap.model import LatentPrior, LinearPair, MlpPair, dct_basis_pair, load_model, save_model

__all__ = [
    "AggregationRule",
    "Calibration",
    "LatentPrior",
    "LinearPair",
    "MetricConfig",
    "MetricKind",
    "MlpPair",
    "Verdict",
    "calibrate_threshold",
    "dct_basis_pair",
    "detect_batch",
    "distance",
    "load_model",
    "save_model",
]
