"""
Feature-domain segmentation into fixed-length training windows
"""

from typing import List

import numpy as np

from src.errors import ConfigurationError


def _as_matrix(feat) -> np.ndarray:
    values = getattr(feat, "values", feat)
    return np.asarray(values)


def segment_stride(seg_len: int, overlap_fraction: float) -> int:
    """Frames between consecutive segment starts."""
    return max(1, int(round(seg_len * (1.0 - overlap_fraction))))


def segment_features(feat, seg_len: int = 100, overlap_fraction: float = 0.5) -> List[np.ndarray]:
    """
    Chunk a (rows x frames) feature matrix into seg_len-column windows.

    Every window fully inside the matrix is emitted; a matrix shorter than
    seg_len yields one segment zero-padded on the right.
    """
    if seg_len < 1:
        raise ConfigurationError(f"seg_len must be >= 1, got {seg_len}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ConfigurationError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")

    values = _as_matrix(feat)
    if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
        raise ConfigurationError(f"Cannot segment empty feature matrix of shape {values.shape}")

    n_frames = values.shape[1]
    if n_frames < seg_len:
        padded = np.zeros((values.shape[0], seg_len), dtype=values.dtype)
        padded[:, :n_frames] = values
        return [padded]

    stride = segment_stride(seg_len, overlap_fraction)
    return [values[:, s:s + seg_len].copy() for s in range(0, n_frames - seg_len + 1, stride)]
