"""
Grad-CAM saliency for the convolutional classifier
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from src.errors import ConfigurationError
from src.model.network import NetworkModel, backward_from_logits, forward


@dataclass
class GradCamMap:
    values: np.ndarray  # input-shaped, non-negative
    target_class: int
    alphas: np.ndarray  # per-filter weights
    coarse: np.ndarray  # map at the last conv resolution, before upsampling


def upsample_bilinear(grid: np.ndarray, shape) -> np.ndarray:
    """Bilinear resize with corner alignment."""
    rows = np.linspace(0, grid.shape[0] - 1, shape[0])
    cols = np.linspace(0, grid.shape[1] - 1, shape[1])
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return map_coordinates(grid, [rr, cc], order=1, mode="nearest")


def grad_cam(model: NetworkModel, feat, target_class: int) -> GradCamMap:
    """
    Class-discriminative map from the last conv layer.

    alpha_k is the spatial mean of d y_c / d A_k (y_c pre-softmax); the map is
    ReLU(mean_k alpha_k A_k), upsampled to the input shape.
    """
    n_classes = model.spec.n_classes
    if not 0 <= int(target_class) < n_classes:
        raise ConfigurationError(f"Class index {target_class} out of range for {n_classes} classes")

    x = np.asarray(getattr(feat, "values", feat))
    _, cache = forward(model, x, train_mode=False)
    onehot = np.zeros(n_classes, dtype=cache.logits.dtype)
    onehot[int(target_class)] = 1
    _, d_act = backward_from_logits(model, cache, onehot, stop_at_activation=True)

    activation = cache.final_activation.astype(np.float64)
    alphas = d_act.astype(np.float64).mean(axis=(1, 2))
    coarse = np.maximum(np.tensordot(alphas, activation, axes=([0], [0])) / len(alphas), 0.0)
    values = np.maximum(upsample_bilinear(coarse, x.shape[-2:]), 0.0)
    return GradCamMap(values=values, target_class=int(target_class), alphas=alphas, coarse=coarse)
