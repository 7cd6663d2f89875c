"""
Convolutional emotion classifier with hand-written backpropagation.

With input_norm="instance" every input matrix is first shifted and scaled
to zero mean and unit variance.

Default architecture (frequency x time):
    conv 5x5 -> ReLU -> maxpool 2x1
    conv 3x3 -> ReLU -> maxpool 2x1
    conv 3x3 -> ReLU -> maxpool 2x1
    conv 1x1 -> ReLU -> maxpool 2x1
    global average pool  (embedding, one value per final filter)
    fully connected 64 -> ReLU -> dropout
    linear -> softmax over classes
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import layers
from src.errors import ConfigurationError, TrainingError

logger = logging.getLogger(__name__)

POOL = 2
INPUT_NORMS = ("none", "instance")


@dataclass
class NetworkSpec:
    """Layer geometry; conv layers share one filter count"""
    n_classes: int
    kernel_sizes: Tuple[int, ...] = (5, 3, 3, 1)
    n_filters: int = 128
    fc_units: int = 64
    dropout_p: float = 0.3
    input_norm: str = "instance"  # none | instance

    def __post_init__(self):
        self.kernel_sizes = tuple(int(k) for k in self.kernel_sizes)
        if self.n_classes < 2:
            raise ConfigurationError(f"n_classes must be >= 2, got {self.n_classes}")
        if not self.kernel_sizes or any(k < 1 for k in self.kernel_sizes):
            raise ConfigurationError(f"Invalid kernel sizes {self.kernel_sizes}")
        if self.n_filters < 1 or self.fc_units < 1:
            raise ConfigurationError("n_filters and fc_units must be >= 1")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigurationError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.input_norm not in INPUT_NORMS:
            raise ConfigurationError(f"Unknown input_norm {self.input_norm!r}, expected one of {INPUT_NORMS}")

    @classmethod
    def tiny(cls, n_classes: int = 3, n_filters: int = 4, fc_units: int = 8,
             kernel_sizes: Tuple[int, ...] = (3, 3), dropout_p: float = 0.3,
             input_norm: str = "instance") -> "NetworkSpec":
        """Two small conv layers; accepts inputs with >= 4 rows."""
        return cls(n_classes=n_classes, kernel_sizes=kernel_sizes, n_filters=n_filters,
                   fc_units=fc_units, dropout_p=dropout_p, input_norm=input_norm)

    @property
    def n_conv(self) -> int:
        return len(self.kernel_sizes)

    @property
    def embedding_dim(self) -> int:
        return self.n_filters

    @property
    def min_rows(self) -> int:
        return POOL ** self.n_conv

    def freq_extents(self, n_rows: int) -> List[int]:
        """Frequency extent after each pool, input first."""
        extents = [n_rows]
        for _ in range(self.n_conv):
            extents.append(extents[-1] // POOL)
        return extents

    def parameter_shapes(self, in_channels: int = 1) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        channels = in_channels
        for i, k in enumerate(self.kernel_sizes, 1):
            shapes[f"conv{i}.w"] = (self.n_filters, channels, k, k)
            shapes[f"conv{i}.b"] = (self.n_filters,)
            channels = self.n_filters
        shapes["fc.w"] = (self.n_filters, self.fc_units)
        shapes["fc.b"] = (self.fc_units,)
        shapes["out.w"] = (self.fc_units, self.n_classes)
        shapes["out.b"] = (self.n_classes,)
        return shapes


@dataclass
class NetworkModel:
    """Spec plus parameters in declaration order"""
    spec: NetworkSpec
    params: Dict[str, np.ndarray]
    rng_seed: int = 0
    label_set: List[str] = field(default_factory=list)
    input_rows: Optional[int] = None  # feature rows seen in training

    @classmethod
    def initialize(cls, spec: NetworkSpec, seed: int = 0, dtype=np.float32,
                   label_set: Optional[List[str]] = None) -> "NetworkModel":
        """He-uniform weights from a seeded generator, zero biases."""
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in spec.parameter_shapes().items():
            if name.endswith(".b"):
                params[name] = np.zeros(shape, dtype=dtype)
            else:
                fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
                limit = np.sqrt(6.0 / fan_in)
                params[name] = rng.uniform(-limit, limit, size=shape).astype(dtype)
        return cls(spec=spec, params=params, rng_seed=seed, label_set=list(label_set or []))

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def copy(self) -> "NetworkModel":
        return NetworkModel(spec=copy.deepcopy(self.spec), params={k: v.copy() for k, v in self.params.items()},
                            rng_seed=self.rng_seed, label_set=list(self.label_set), input_rows=self.input_rows)

    def astype(self, dtype) -> "NetworkModel":
        clone = self.copy()
        clone.params = {k: v.astype(dtype) for k, v in clone.params.items()}
        return clone


@dataclass
class ForwardCache:
    """Per-layer caches of one forward pass"""
    conv: List[tuple]
    relu: List[tuple]
    pool: List[tuple]
    gap: tuple
    fc: tuple
    fc_relu: tuple
    dropout: object
    out: tuple
    final_activation: np.ndarray  # post-ReLU output of the last conv, before pooling
    embedding: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    param_names: Tuple[str, ...]


def _prepare_input(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(getattr(x, "values", x))
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[0] != 1:
        raise ConfigurationError(f"Expected a single-channel (rows x frames) input, got shape {x.shape}")
    if x.shape[1] < model.spec.min_rows:
        raise ConfigurationError(
            f"Input has {x.shape[1]} frequency rows; need >= {model.spec.min_rows} for {model.spec.n_conv} pools"
        )
    if x.shape[2] < 1:
        raise ConfigurationError("Input has no time frames")
    if model.spec.input_norm == "instance":
        x = x - x.mean(dtype=np.float64)
        std = x.std(dtype=np.float64)
        if std > 1e-6:
            x = x / std
    return x.astype(model.dtype, copy=False)


def _conv_stack(model: NetworkModel, x: np.ndarray):
    p = model.params
    conv_c, relu_c = [], []
    h = x
    pool_c = []
    activation = None
    for i in range(1, model.spec.n_conv + 1):
        h, c = layers.conv_forward(h, p[f"conv{i}.w"], p[f"conv{i}.b"])
        conv_c.append(c)
        h, c = layers.relu_forward(h)
        relu_c.append(c)
        activation = h
        h, c = layers.maxpool_freq_forward(h, POOL)
        pool_c.append(c)
    return h, activation, conv_c, relu_c, pool_c


def head_scores(model: NetworkModel, activation: np.ndarray) -> np.ndarray:
    """Pre-softmax class scores from last-conv activations (inference path)."""
    pooled, _ = layers.maxpool_freq_forward(activation, POOL)
    emb, _ = layers.gap_forward(pooled)
    h, _ = layers.affine_forward(emb, model.params["fc.w"], model.params["fc.b"])
    h, _ = layers.relu_forward(h)
    logits, _ = layers.affine_forward(h, model.params["out.w"], model.params["out.b"])
    return logits


def forward(model: NetworkModel, x, train_mode: bool = False,
            dropout_seed: Optional[int] = None) -> Tuple[np.ndarray, ForwardCache]:
    """
    Class probabilities for one rows x frames input.

    Dropout is applied only when train_mode is set; its mask is drawn from
    dropout_seed so the pass is reproducible.
    """
    x = _prepare_input(model, x)
    p = model.params

    pooled, activation, conv_c, relu_c, pool_c = _conv_stack(model, x)
    emb, gap_c = layers.gap_forward(pooled)
    h, fc_c = layers.affine_forward(emb, p["fc.w"], p["fc.b"])
    h, fc_relu_c = layers.relu_forward(h)
    rng = np.random.default_rng(dropout_seed) if train_mode else None
    h, drop_c = layers.dropout_forward(h, model.spec.dropout_p, rng)
    logits, out_c = layers.affine_forward(h, p["out.w"], p["out.b"])
    probs = layers.softmax(logits)

    cache = ForwardCache(conv=conv_c, relu=relu_c, pool=pool_c, gap=gap_c, fc=fc_c, fc_relu=fc_relu_c,
                         dropout=drop_c, out=out_c, final_activation=activation, embedding=emb,
                         logits=logits, probs=probs, param_names=tuple(p.keys()))
    return probs, cache


def backward_from_logits(model: NetworkModel, cache: ForwardCache, dlogits: np.ndarray,
                         stop_at_activation: bool = False):
    """
    Backpropagate dlogits through the network.

    Returns (grads, d_final_activation). With stop_at_activation the conv
    stack is skipped and only head gradients are filled in.
    """
    if tuple(model.params.keys()) != cache.param_names:
        raise TrainingError("Forward cache does not belong to this model")

    grads: Dict[str, np.ndarray] = {}
    dh, grads["out.w"], grads["out.b"] = layers.affine_backward(dlogits, cache.out)
    dh = layers.dropout_backward(dh, cache.dropout)
    dh = layers.relu_backward(dh, cache.fc_relu)
    demb, grads["fc.w"], grads["fc.b"] = layers.affine_backward(dh, cache.fc)
    dpooled = layers.gap_backward(demb, cache.gap)

    n = model.spec.n_conv
    dact = layers.maxpool_freq_backward(dpooled, cache.pool[n - 1])
    if stop_at_activation:
        return grads, dact

    d = dact
    for i in range(n, 0, -1):
        if i < n:
            d = layers.maxpool_freq_backward(d, cache.pool[i - 1])
        d = layers.relu_backward(d, cache.relu[i - 1])
        d, grads[f"conv{i}.w"], grads[f"conv{i}.b"] = layers.conv_backward(d, cache.conv[i - 1])

    return {k: grads[k] for k in model.params}, dact


def backward(model: NetworkModel, cache: ForwardCache, target: int) -> Tuple[float, Dict[str, np.ndarray]]:
    """Cross-entropy loss and gradients of every parameter for one sample."""
    if not 0 <= target < model.spec.n_classes:
        raise TrainingError(f"Target class {target} out of range for {model.spec.n_classes} classes")
    loss, _, dlogits = layers.softmax_loss(cache.logits, target)
    grads, _ = backward_from_logits(model, cache, dlogits.astype(cache.logits.dtype))
    return loss, grads


def loss_of(model: NetworkModel, x, target: int, train_mode: bool = False,
            dropout_seed: Optional[int] = None) -> float:
    _, cache = forward(model, x, train_mode=train_mode, dropout_seed=dropout_seed)
    return layers.softmax_loss(cache.logits, target)[0]


def numerical_gradient(model: NetworkModel, x, target: int, h: float = 1e-3, train_mode: bool = False,
                       dropout_seed: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Central finite differences of the loss for every parameter (float64)."""
    m = model.astype(np.float64)
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    grads = {}
    for name, param in m.params.items():
        g = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + h
            plus = loss_of(m, x, target, train_mode, dropout_seed)
            param[idx] = orig - h
            minus = loss_of(m, x, target, train_mode, dropout_seed)
            param[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads[name] = g
    return grads


def _check_rows(model: NetworkModel, x: np.ndarray, expected_rows: Optional[int]):
    rows = np.asarray(getattr(x, "values", x)).shape[-2]
    expected_rows = expected_rows if expected_rows is not None else model.input_rows
    if expected_rows is not None and rows != expected_rows:
        raise ConfigurationError(f"Feature has {rows} rows, model was trained on {expected_rows}")


def predict_utterance(model: NetworkModel, feat, expected_rows: Optional[int] = None) -> np.ndarray:
    """Class probabilities from one full-length pass, dropout off."""
    _check_rows(model, feat, expected_rows)
    probs, _ = forward(model, feat, train_mode=False)
    return probs


def extract_embedding(model: NetworkModel, feat, expected_rows: Optional[int] = None) -> np.ndarray:
    """GAP output (one value per final conv filter), dropout off."""
    _check_rows(model, feat, expected_rows)
    x = _prepare_input(model, feat)
    pooled, _, _, _, _ = _conv_stack(model, x)
    emb, _ = layers.gap_forward(pooled)
    return emb
