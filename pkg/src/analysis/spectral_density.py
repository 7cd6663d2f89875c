"""
Corpus energy spectral density per frequency bin
"""

from typing import Sequence

import numpy as np

from src.errors import ConfigurationError
from src.features.models import TimeFrequencyMatrix


def energy_spectral_density(tfs: Sequence[TimeFrequencyMatrix]) -> np.ndarray:
    """Per bin: time mean of squared coefficients, then mean over utterances."""
    if not tfs:
        raise ConfigurationError("No matrices given")
    ref = tfs[0]
    per_utt = []
    for i, tf in enumerate(tfs):
        if tf.n_bins != ref.n_bins or not np.allclose(tf.bin_freqs, ref.bin_freqs):
            raise ConfigurationError(f"Matrix {i} has a different bin geometry than matrix 0")
        if tf.n_frames == 0:
            raise ConfigurationError(f"Matrix {i} has no frames")
        per_utt.append((np.abs(tf.values) ** 2).mean(axis=1))
    return np.mean(per_utt, axis=0)
