"""
RBF support vector machine trained with SMO, one-vs-rest for multiclass.

The binary solver works on the dual
    min_a  1/2 a'Qa - sum(a),   Q_ij = y_i y_j K(x_i, x_j)
    s.t.   0 <= a_i <= C,  y'a = 0
and updates the maximal violating pair each iteration.
"""

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics.pairwise import rbf_kernel as rbf_gram

from src.errors import ConfigurationError, FeatureFileError, TrainingError
from src.metrics import observe_smo_iterations

logger = logging.getLogger(__name__)

MAGIC = b"MSFSVM01"
DEFAULT_TOL = 1e-3


def rbf_kernel(x, y, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2)"""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ConfigurationError(f"Dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if not gamma > 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


@dataclass
class SmoResult:
    """Full-length dual solution of one binary problem"""
    alpha: np.ndarray
    bias: float
    iterations: int
    gap: float
    objective_trace: List[float] = field(default_factory=list)


def dual_value(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij (maximisation form)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _violating_pair(alpha, y, G, C):
    minus_yg = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    up_vals = np.where(up, minus_yg, -np.inf)
    low_vals = np.where(low, minus_yg, np.inf)
    i = int(np.argmax(up_vals))
    j = int(np.argmin(low_vals))
    return i, j, float(up_vals[i]), float(low_vals[j])


def smo_solve(K: np.ndarray, y: np.ndarray, C: float = 1.0, tol: float = DEFAULT_TOL,
              max_iter: Optional[int] = None, trace: bool = False) -> SmoResult:
    """
    Binary SMO with maximal-violating-pair selection.

    Stops when max_{I_up} -y*G - min_{I_low} -y*G < tol or after max_iter
    pair updates (default max(10 n^2, 100)). Ties pick the
    lowest index.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    max_iter = max_iter or max(10 * n * n, 100)
    alpha = np.zeros(n)
    G = -np.ones(n)
    objective = [0.0] if trace else []

    it = 0
    gap = np.inf
    while it < max_iter:
        i, j, m, M = _violating_pair(alpha, y, G, C)
        gap = m - M
        if gap < tol:
            break

        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        eta = eta if eta > 1e-12 else 1e-12
        t = (m - M) / eta  # = -(y_i G_i - y_j G_j) / eta >= 0
        t = min(t, C - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else C - alpha[j])

        d_i = y[i] * t
        d_j = -y[j] * t
        alpha[i] = min(max(alpha[i] + d_i, 0.0), C)
        alpha[j] = min(max(alpha[j] + d_j, 0.0), C)
        G += y * (y[i] * K[:, i] * d_i + y[j] * K[:, j] * d_j)
        it += 1
        if trace:
            objective.append(dual_value(alpha, y, K))

    if gap >= tol:
        logger.warning("[SMO] Stopped at iteration cap %d with gap %.2e", max_iter, gap)

    free = (alpha > 0) & (alpha < C)
    minus_yg = -y * G
    if free.any():
        bias = float(minus_yg[free].mean())
    else:
        _, _, m, M = _violating_pair(alpha, y, G, C)
        finite = [v for v in (m, M) if np.isfinite(v)]
        bias = float(np.mean(finite)) if finite else 0.0

    observe_smo_iterations(it)
    return SmoResult(alpha=alpha, bias=bias, iterations=it, gap=float(gap), objective_trace=objective)


@dataclass
class BinaryMachine:
    """One-vs-rest machine: support vectors, a_i * y_i, bias"""
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float

    def decision(self, X: np.ndarray, gamma: float) -> np.ndarray:
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        return rbf_gram(X, self.support_vectors, gamma=gamma) @ self.dual_coef + self.bias


@dataclass
class SvmModel:
    """Per-class machines sharing C and gamma"""
    machines: List[BinaryMachine]
    classes: List[int]
    C: float = 1.0
    gamma: float = 0.001
    mean: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        for m in self.machines:
            if len(m.support_vectors):
                return int(m.support_vectors.shape[1])
        return int(len(self.mean)) if self.mean is not None else 0

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale


def dual_objective(model: Union[SvmModel, BinaryMachine], gamma: Optional[float] = None) -> Union[float, List[float]]:
    """Dual value of each machine, computed from its support vectors."""
    if isinstance(model, SvmModel):
        return [dual_objective(m, model.gamma) for m in model.machines]
    if len(model.dual_coef) == 0:
        return 0.0
    K = rbf_gram(model.support_vectors, model.support_vectors, gamma=gamma)
    alpha = np.abs(model.dual_coef)
    return float(alpha.sum() - 0.5 * model.dual_coef @ K @ model.dual_coef)


def _as_matrix(embeddings) -> np.ndarray:
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X


def train_svm(embeddings: Sequence, labels: Sequence[int], C: float = 1.0, gamma: float = 0.001,
              tol: float = DEFAULT_TOL, standardize: bool = False, max_iter: Optional[int] = None) -> SvmModel:
    """One-vs-rest RBF SVM; deterministic given input order."""
    X = _as_matrix(embeddings)
    labels = np.asarray(labels)
    if len(X) != len(labels):
        raise ConfigurationError(f"{len(X)} embeddings but {len(labels)} labels")
    if not np.all(np.isfinite(X)):
        raise TrainingError("Embeddings contain non-finite values")
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise TrainingError(f"SVM needs >= 2 classes, got {classes}")
    if not C > 0 or not gamma > 0:
        raise ConfigurationError(f"C and gamma must be positive, got C={C}, gamma={gamma}")

    mean = scale = None
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - mean) / scale

    K = rbf_gram(X, X, gamma=gamma)
    machines = []
    for cls in classes:
        y = np.where(labels == cls, 1.0, -1.0)
        res = smo_solve(K, y, C=C, tol=tol, max_iter=max_iter)
        sv = np.flatnonzero(res.alpha > 0)
        machines.append(BinaryMachine(support_vectors=X[sv].copy(), dual_coef=res.alpha[sv] * y[sv], bias=res.bias))
        logger.debug("[SMO] class %s: %d support vectors, %d iterations", cls, len(sv), res.iterations)

    return SvmModel(machines=machines, classes=list(classes), C=C, gamma=gamma, mean=mean, scale=scale)


def decision_values(model: SvmModel, X) -> np.ndarray:
    """(n_samples, n_classes) one-vs-rest decision values."""
    X = _as_matrix(X)
    dim = model.dim
    if dim and X.shape[1] != dim:
        raise ConfigurationError(f"Embedding dimension {X.shape[1]} does not match model dimension {dim}")
    X = model.transform(X)
    return np.stack([m.decision(X, model.gamma) for m in model.machines], axis=1)


def svm_predict(model: SvmModel, x) -> Tuple[int, np.ndarray]:
    """(label, per-class scores); ties go to the lowest class index."""
    scores = decision_values(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
    return model.classes[int(np.argmax(scores))], scores


# --- MSFSVM01 codec -------------------------------------------------------

def encode_svm(model: SvmModel) -> bytes:
    chunks = [MAGIC, struct.pack("<ffI", model.C, model.gamma, len(model.machines))]
    for m in model.machines:
        n_sv = len(m.dual_coef)
        dim = m.support_vectors.shape[1] if n_sv else model.dim
        chunks.append(struct.pack("<II", n_sv, dim))
        chunks.append(np.asarray(m.dual_coef, dtype="<f4").tobytes())
        chunks.append(np.ascontiguousarray(m.support_vectors, dtype="<f4").tobytes())
        chunks.append(struct.pack("<f", m.bias))

    meta = [f"classes={','.join(str(c) for c in model.classes)}"]
    if model.mean is not None:
        meta.append("mean=" + ",".join(repr(float(v)) for v in model.mean))
        meta.append("scale=" + ",".join(repr(float(v)) for v in model.scale))
    chunks.append(("\n".join(meta) + "\n").encode("utf-8"))
    return b"".join(chunks)


def decode_svm(data: bytes, source: str = "<bytes>") -> SvmModel:
    if data[:8] != MAGIC:
        raise FeatureFileError(f"{source}: bad magic {data[:8]!r}, expected {MAGIC!r}")
    try:
        pos = 8
        C, gamma, n_classes = struct.unpack_from("<ffI", data, pos)
        pos += 12
        machines = []
        for _ in range(n_classes):
            n_sv, dim = struct.unpack_from("<II", data, pos)
            pos += 8
            coef = np.frombuffer(data, dtype="<f4", count=n_sv, offset=pos).astype(np.float64)
            pos += 4 * n_sv
            sv = np.frombuffer(data, dtype="<f4", count=n_sv * dim, offset=pos).astype(np.float64).reshape(n_sv, dim)
            pos += 4 * n_sv * dim
            (bias,) = struct.unpack_from("<f", data, pos)
            pos += 4
            machines.append(BinaryMachine(support_vectors=sv, dual_coef=coef, bias=float(bias)))
    except (struct.error, ValueError) as e:
        raise FeatureFileError(f"{source}: truncated SVM model: {e}") from e

    meta = dict(line.partition("=")[::2] for line in data[pos:].decode("utf-8").splitlines() if "=" in line)
    classes = [int(c) for c in meta["classes"].split(",")] if meta.get("classes") else list(range(n_classes))
    mean = np.array([float(v) for v in meta["mean"].split(",")]) if "mean" in meta else None
    scale = np.array([float(v) for v in meta["scale"].split(",")]) if "scale" in meta else None
    return SvmModel(machines=machines, classes=classes, C=float(C), gamma=float(gamma), mean=mean, scale=scale)


def save_svm(path: Union[str, Path], model: SvmModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_svm(model))
    return path


def load_svm(path: Union[str, Path]) -> SvmModel:
    path = Path(path)
    if not path.is_file():
        raise FeatureFileError(f"SVM model not found: {path}")
    return decode_svm(path.read_bytes(), source=str(path))
