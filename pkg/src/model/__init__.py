"""
Model module exports
"""

from .network import (
    NetworkSpec,
    NetworkModel,
    ForwardCache,
    forward,
    backward,
    backward_from_logits,
    head_scores,
    numerical_gradient,
    predict_utterance,
    extract_embedding,
)
from .training import OPTIMIZERS, TrainConfig, EpochRecord, Optimizer, train, validation_uar
from .checkpoint import save_checkpoint, load_checkpoint
from .svm import (
    SvmModel,
    BinaryMachine,
    rbf_kernel,
    smo_solve,
    train_svm,
    svm_predict,
    decision_values,
    dual_objective,
    save_svm,
    load_svm,
)

__all__ = [
    "NetworkSpec",
    "NetworkModel",
    "ForwardCache",
    "forward",
    "backward",
    "backward_from_logits",
    "head_scores",
    "numerical_gradient",
    "predict_utterance",
    "extract_embedding",
    "TrainConfig",
    "EpochRecord",
    "Optimizer",
    "OPTIMIZERS",
    "train",
    "validation_uar",
    "save_checkpoint",
    "load_checkpoint",
    "SvmModel",
    "BinaryMachine",
    "rbf_kernel",
    "smo_solve",
    "train_svm",
    "svm_predict",
    "decision_values",
    "dual_objective",
    "save_svm",
    "load_svm",
]
