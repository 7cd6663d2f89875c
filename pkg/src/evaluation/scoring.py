"""
Confusion matrices, accuracy and unweighted average recall
"""

from dataclasses import dataclass
from typing import Hashable, List, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from src.errors import ConfigurationError


@dataclass
class ConfusionMatrix:
    """counts[i][j] = utterances of true class i predicted as j"""
    counts: np.ndarray
    labels: List[Hashable]

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if self.counts.shape != (k, k):
            raise ConfigurationError(f"Confusion counts {self.counts.shape} do not match {k} labels")
        if (self.counts < 0).any():
            raise ConfigurationError("Confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if list(self.labels) != list(other.labels):
            raise ConfigurationError("Cannot add confusion matrices with different label orders")
        return ConfusionMatrix(self.counts + other.counts, list(self.labels))


def confusion_matrix(true_labels: Sequence, predicted_labels: Sequence, label_order: Sequence) -> ConfusionMatrix:
    if len(true_labels) != len(predicted_labels):
        raise ConfigurationError(f"{len(true_labels)} true labels but {len(predicted_labels)} predictions")
    order = list(label_order)
    known = set(order)
    unknown = [l for l in list(true_labels) + list(predicted_labels) if l not in known]
    if unknown:
        raise ConfigurationError(f"Labels {sorted(set(map(str, unknown)))} not in label order {order}")
    if len(true_labels) == 0:
        return ConfusionMatrix(np.zeros((len(order), len(order)), dtype=np.int64), order)

    counts = sk_confusion_matrix(list(true_labels), list(predicted_labels), labels=order)
    return ConfusionMatrix(counts, order)


def uar(cm: ConfusionMatrix) -> float:
    """Mean per-class recall over classes that occur in the truth."""
    totals = cm.counts.sum(axis=1)
    present = totals > 0
    if not present.any():
        raise ConfigurationError("UAR is undefined for an empty confusion matrix")
    recalls = np.diag(cm.counts)[present] / totals[present]
    return float(recalls.mean())


def accuracy(cm: ConfusionMatrix) -> float:
    total = cm.total
    if total == 0:
        raise ConfigurationError("Accuracy is undefined for an empty confusion matrix")
    return float(np.trace(cm.counts) / total)
