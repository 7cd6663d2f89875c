"""
Time-averaged modulation maps and F-ratio discrimination maps
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from src.errors import ConfigurationError
from src.features.models import ModulationTensor

logger = logging.getLogger(__name__)


@dataclass
class AfMfMap:
    """C x M plane over auditory (rows) and modulation (columns) frequency"""
    values: np.ndarray
    af_freqs: np.ndarray
    mf_freqs: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.af_freqs), len(self.mf_freqs)):
            raise ConfigurationError(
                f"Map shape {self.values.shape} does not match {len(self.af_freqs)} AF x {len(self.mf_freqs)} MF"
            )

    @property
    def infinite_cells(self) -> np.ndarray:
        """(row, col) indices of flagged +inf cells."""
        return np.argwhere(np.isinf(self.values))


def time_average_msf(tensor: ModulationTensor) -> AfMfMap:
    if tensor.values.ndim != 3 or tensor.values.shape[2] == 0 or tensor.values.size == 0:
        raise ConfigurationError(f"Cannot average an empty modulation tensor of shape {tensor.values.shape}")
    return AfMfMap(values=tensor.values.mean(axis=2), af_freqs=tensor.af_freqs, mf_freqs=tensor.mf_freqs)


def _stack(maps: Sequence[AfMfMap], name: str) -> np.ndarray:
    if len(maps) < 2:
        raise ConfigurationError(f"F-ratio needs >= 2 maps for {name}, got {len(maps)}")
    shapes = {m.values.shape for m in maps}
    if len(shapes) != 1:
        raise ConfigurationError(f"Maps for {name} have differing shapes {sorted(shapes)}")
    return np.stack([m.values for m in maps])


def f_ratio(maps_class_a: Sequence[AfMfMap], maps_class_b: Sequence[AfMfMap]) -> AfMfMap:
    """
    Per-cell Fisher ratio (mu_a - mu_b)^2 / (var_a + var_b), unbiased variances.

    Zero variance with equal means gives 0; with unequal means +inf, which is
    logged and reported through AfMfMap.infinite_cells.
    """
    a = _stack(maps_class_a, "class a")
    b = _stack(maps_class_b, "class b")
    if a.shape[1:] != b.shape[1:]:
        raise ConfigurationError(f"Class map shapes differ: {a.shape[1:]} vs {b.shape[1:]}")

    num = (a.mean(axis=0) - b.mean(axis=0)) ** 2
    den = a.var(axis=0, ddof=1) + b.var(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))

    n_inf = int(np.isinf(ratio).sum())
    if n_inf:
        logger.warning("[Analysis] F-ratio has %d zero-variance cells with differing means (+inf)", n_inf)

    ref = maps_class_a[0]
    return AfMfMap(values=ratio, af_freqs=ref.af_freqs, mf_freqs=ref.mf_freqs)


def f_ratio_against_reference(maps_by_label: Dict[str, List[AfMfMap]], reference_label: str) -> Dict[str, AfMfMap]:
    """F-ratio of every other class against one reference class."""
    if reference_label not in maps_by_label:
        raise ConfigurationError(f"Reference label {reference_label!r} not in {sorted(maps_by_label)}")
    ref = maps_by_label[reference_label]
    return {label: f_ratio(maps, ref) for label, maps in maps_by_label.items() if label != reference_label}
