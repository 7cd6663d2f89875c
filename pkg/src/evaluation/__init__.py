"""
Evaluation module exports
"""

from .scoring import ConfusionMatrix, confusion_matrix, uar, accuracy
from .folds import LosoFold, loso_folds
from .experiment import (
    ExperimentConfig,
    FoldResult,
    EvaluationReport,
    run_experiment,
    pooled_confusion,
    write_report,
    FRAMEWORKS,
)

__all__ = [
    "ConfusionMatrix",
    "confusion_matrix",
    "uar",
    "accuracy",
    "LosoFold",
    "loso_folds",
    "ExperimentConfig",
    "FoldResult",
    "EvaluationReport",
    "run_experiment",
    "pooled_confusion",
    "write_report",
    "FRAMEWORKS",
]
