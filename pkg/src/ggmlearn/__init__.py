"""Structure learning for Gaussian graphical models."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import GgmError, NumericalError, ValidationError
from .evalbench import cv_objective, l1_error, min_samples_sweep, structure_error, ws_distance
from .generators import GeneratorSpec
from .kernels import BACKEND
from .learners import (
    ALGORITHMS,
    LearnerConfig,
    NeighborhoodEstimate,
    PrecisionEstimate,
    config_for_model,
    greedy_and_prune,
    hybrid_mb,
    learn,
    merge_and_symmetrize,
    search_and_validate,
    threshold_edges,
    ws_regression,
)
from .model import GgmModel, classify, sdd_rescaling
from .sampler import SampleSet, sample

__all__ = [
    "ALGORITHMS",
    "BACKEND",
    "GeneratorSpec",
    "GgmError",
    "GgmModel",
    "LearnerConfig",
    "NeighborhoodEstimate",
    "NumericalError",
    "PrecisionEstimate",
    "SampleSet",
    "ValidationError",
    "classify",
    "config_for_model",
    "cv_objective",
    "greedy_and_prune",
    "hybrid_mb",
    "l1_error",
    "learn",
    "merge_and_symmetrize",
    "min_samples_sweep",
    "sample",
    "sdd_rescaling",
    "search_and_validate",
    "structure_error",
    "threshold_edges",
    "ws_distance",
    "ws_regression",
]
