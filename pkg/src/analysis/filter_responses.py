"""
Filterbank frequency responses and frequency-scale comparison
"""

from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.signal import freqz

from src.errors import ConfigurationError
from src.features.spectral import gammatone_centers, hz_to_mel, mel_to_hz


def filterbank_response(kernels: Sequence[np.ndarray], rate: float,
                        n_points: int = 1024) -> Tuple[np.ndarray, np.ndarray]:
    """|H(f)| of each kernel on n_points frequencies from 0 to rate/2."""
    if not kernels:
        raise ConfigurationError("No kernels given")
    freqs = np.linspace(0.0, rate / 2.0, n_points)
    responses = np.empty((len(kernels), n_points))
    for i, k in enumerate(kernels):
        _, h = freqz(np.asarray(k), worN=freqs, fs=rate)
        responses[i] = np.abs(h)
    return freqs, responses


def scale_center_frequencies(n_bins: int = 96, f_lo: float = 32.7, fs: float = 16000.0) -> Dict[str, np.ndarray]:
    """Mel, constant-Q and gammatone centres over the same span."""
    nyquist = fs / 2.0
    if n_bins < 2 or not 0 < f_lo < nyquist:
        raise ConfigurationError(f"Need n_bins >= 2 and 0 < f_lo < {nyquist}")
    return {
        "mel": mel_to_hz(np.linspace(hz_to_mel(f_lo), hz_to_mel(nyquist), n_bins)),
        "constant-q": np.geomspace(f_lo, nyquist, n_bins),
        "gammatone": gammatone_centers(n_bins, f_lo, fs),
    }
