"""
Minibatch training with validation-UAR model selection
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .network import NetworkModel, backward, forward, predict_utterance
from src.errors import ConfigurationError, TrainingError
from src.metrics import inc_training_epoch, observe_epoch_latency, set_validation_uar

logger = logging.getLogger(__name__)

LabeledMatrix = Tuple[np.ndarray, int]

OPTIMIZERS = ("sgd", "momentum", "adam")


@dataclass
class TrainConfig:
    """Optimisation settings"""
    learning_rate: float = 0.001
    batch_size: int = 64
    dropout_p: float = 0.3
    epochs: int = 50
    seed: int = 0
    optimizer: str = "sgd"  # sgd | momentum | adam
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigurationError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate < 0:
            raise ConfigurationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"Unknown optimizer {self.optimizer!r}, expected one of {OPTIMIZERS}")
        for name in ("momentum", "beta1", "beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1), got {getattr(self, name)}")
        if not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")


class Optimizer:
    """
    Parameter update rule plus its running state.

    sgd: p -= lr * g
    momentum: v = mu * v + g; p -= lr * v
    adam: bias-corrected first and second moments, p -= lr * m / (sqrt(v) + eps)
    """

    def __init__(self, cfg: TrainConfig, params: Dict[str, np.ndarray]):
        self.cfg = cfg
        self.steps = 0
        self.first: Dict[str, np.ndarray] = {}
        self.second: Dict[str, np.ndarray] = {}
        if cfg.optimizer != "sgd":
            self.first = {k: np.zeros(v.shape) for k, v in params.items()}
        if cfg.optimizer == "adam":
            self.second = {k: np.zeros(v.shape) for k, v in params.items()}

    def _delta(self, name: str, g: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if cfg.optimizer == "sgd":
            return cfg.learning_rate * g
        if cfg.optimizer == "momentum":
            self.first[name] = cfg.momentum * self.first[name] + g
            return cfg.learning_rate * self.first[name]
        self.first[name] = cfg.beta1 * self.first[name] + (1.0 - cfg.beta1) * g
        self.second[name] = cfg.beta2 * self.second[name] + (1.0 - cfg.beta2) * g * g
        m_hat = self.first[name] / (1.0 - cfg.beta1 ** self.steps)
        v_hat = self.second[name] / (1.0 - cfg.beta2 ** self.steps)
        return cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        """Apply one update in place; grads are already batch means."""
        self.steps += 1
        for name, g in grads.items():
            delta = self._delta(name, np.asarray(g, dtype=np.float64))
            params[name] -= delta.astype(params[name].dtype, copy=False)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_uar: float


def validation_uar(model: NetworkModel, utterances: Sequence[LabeledMatrix]) -> float:
    """UAR of whole-utterance predictions."""
    from src.evaluation.scoring import confusion_matrix, uar

    labels = list(range(model.spec.n_classes))
    truth = [y for _, y in utterances]
    preds = [int(np.argmax(predict_utterance(model, x))) for x, _ in utterances]
    return uar(confusion_matrix(truth, preds, labels))


def _check_split(name: str, items: Sequence[LabeledMatrix], n_classes: int):
    if not items:
        raise TrainingError(f"Empty {name} split")
    bad = [y for _, y in items if not 0 <= y < n_classes]
    if bad:
        raise TrainingError(f"{name} split has labels outside [0, {n_classes}): {sorted(set(bad))[:5]}")


def train(model: NetworkModel, train_segments: Sequence[LabeledMatrix], val_utterances: Sequence[LabeledMatrix],
          cfg: TrainConfig) -> Tuple[NetworkModel, List[EpochRecord]]:
    """
    Train a copy of model and return (best model, per-epoch history).

    The best model is the epoch with the highest validation UAR; ties go to
    the earliest epoch. Minibatch gradients are summed in batch order and
    averaged before the cfg.optimizer update.
    """
    n_classes = model.spec.n_classes
    _check_split("training", train_segments, n_classes)
    _check_split("validation", val_utterances, n_classes)
    missing = set(range(n_classes)) - {y for _, y in train_segments}
    if missing:
        raise TrainingError(f"Training split has no samples for classes {sorted(missing)}")

    current = model.copy()
    current.spec.dropout_p = cfg.dropout_p
    current.input_rows = int(np.asarray(train_segments[0][0]).shape[0])
    rng = np.random.default_rng(cfg.seed)
    optimizer = Optimizer(cfg, current.params)

    best = current.copy()
    best_uar = -math.inf
    history: List[EpochRecord] = []
    n = len(train_segments)

    for epoch in range(1, cfg.epochs + 1):
        started = time.time()
        order = rng.permutation(n)
        loss_sum = 0.0

        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            seeds = rng.integers(0, 2 ** 31 - 1, size=len(batch))
            grad_sum = {k: np.zeros_like(v) for k, v in current.params.items()}

            for idx, seed in zip(batch, seeds):
                x, y = train_segments[idx]
                _, cache = forward(current, x, train_mode=True, dropout_seed=int(seed))
                loss, grads = backward(current, cache, y)
                if not math.isfinite(loss):
                    raise TrainingError(f"Non-finite loss at epoch {epoch} (sample {int(idx)})")
                loss_sum += loss
                for k in grad_sum:
                    grad_sum[k] += grads[k]

            optimizer.step(current.params, {k: g / len(batch) for k, g in grad_sum.items()})

        mean_loss = loss_sum / n
        val = validation_uar(current, val_utterances)
        history.append(EpochRecord(epoch=epoch, train_loss=mean_loss, val_uar=val))

        if val > best_uar:
            best_uar = val
            best = current.copy()

        elapsed = time.time() - started
        inc_training_epoch()
        observe_epoch_latency(elapsed)
        set_validation_uar(val)
        logger.info("[Trainer] epoch %d/%d loss=%.4f val_uar=%.4f (%.1fs)", epoch, cfg.epochs, mean_loss, val, elapsed)

    logger.info("[Trainer] Selected epoch with val_uar=%.4f", best_uar)
    return best, history
