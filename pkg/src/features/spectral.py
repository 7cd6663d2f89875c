"""
STFT-based front-ends: mel filterbank energies (MFSC) and gammatone spectrogram
"""

import logging
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import freqz, gammatone, get_window

from .models import FilterbankMatrix, TimeFrequencyMatrix
from src.audio.models import AudioBuffer
from src.errors import ConfigurationError

logger = logging.getLogger(__name__)

# Lowest centre of the gammatone bank, shared with the CQT f_min
GAMMATONE_F_LO = 32.7


def hz_to_mel(f):
    """HTK mel scale: 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def erb_bandwidth(f):
    """Glasberg-Moore equivalent rectangular bandwidth in Hz."""
    return 24.7 * (4.37 * np.asarray(f, dtype=np.float64) / 1000.0 + 1.0)


def hz_to_erb_rate(f):
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(f, dtype=np.float64))


def erb_rate_to_hz(e):
    return (10.0 ** (np.asarray(e, dtype=np.float64) / 21.4) - 1.0) / 0.00437


def fft_bin_freqs(n_fft: int, fs: float) -> np.ndarray:
    return np.arange(n_fft // 2 + 1) * fs / n_fft


def stft(buf: AudioBuffer, frame_len: int = 320, hop: int = 64, n_fft: int = 512) -> TimeFrequencyMatrix:
    """
    One-sided complex STFT with periodic Hann frames centred at n*hop.

    Returns n_fft/2 + 1 bins by floor(len/hop) + 1 frames; samples outside
    the signal are zero.
    """
    if frame_len < 1 or frame_len > n_fft:
        raise ConfigurationError(f"frame_len {frame_len} must be in [1, n_fft={n_fft}]")
    if hop < 1:
        raise ConfigurationError(f"hop must be >= 1, got {hop}")
    buf.require_samples()

    x = buf.samples
    n_frames = len(x) // hop + 1
    padded = np.pad(x, (frame_len // 2, frame_len))
    frames = sliding_window_view(padded, frame_len)[::hop][:n_frames]
    window = get_window("hann", frame_len, fftbins=True)
    spectrum = np.fft.rfft(frames * window, n=n_fft, axis=1).T

    return TimeFrequencyMatrix(values=spectrum, bin_freqs=fft_bin_freqs(n_fft, buf.rate),
                               frame_rate=buf.rate / hop)


def mel_band_edges(n_filters: int, f_lo: float, f_hi: float) -> np.ndarray:
    """n_filters + 2 frequencies equally spaced in mel; filter i spans edges[i]..edges[i+2]."""
    return mel_to_hz(np.linspace(hz_to_mel(f_lo), hz_to_mel(f_hi), n_filters + 2))


def _triangles(edges: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    n_filters = len(edges) - 2
    weights = np.zeros((n_filters, len(freqs)))
    for i in range(n_filters):
        left, center, right = edges[i], edges[i + 1], edges[i + 2]
        rising = (freqs - left) / (center - left)
        falling = (right - freqs) / (right - center)
        weights[i] = np.maximum(0.0, np.minimum(rising, falling))
    return weights


def mel_filterbank(n_filters: int = 24, n_fft: int = 512, fs: float = 16000.0, f_lo: float = 0.0,
                   f_hi: Optional[float] = None) -> FilterbankMatrix:
    """Triangular filters with centres equally spaced on the mel scale."""
    f_hi = fs / 2.0 if f_hi is None else f_hi
    if n_filters < 1:
        raise ConfigurationError(f"n_filters must be >= 1, got {n_filters}")
    if not 0.0 <= f_lo < f_hi:
        raise ConfigurationError(f"Degenerate mel band: f_lo={f_lo}, f_hi={f_hi}")
    if f_hi > fs / 2.0:
        raise ConfigurationError(f"f_hi {f_hi} Hz exceeds Nyquist {fs / 2.0} Hz")

    edges = mel_band_edges(n_filters, f_lo, f_hi)
    weights = _triangles(edges, fft_bin_freqs(n_fft, fs))

    empty = np.flatnonzero(weights.max(axis=1) <= 0)
    if len(empty):
        raise ConfigurationError(
            f"Mel filters {empty.tolist()} fall between FFT bins; use fewer filters or a larger n_fft"
        )
    return FilterbankMatrix(weights=weights, center_freqs=edges[1:-1], scale_kind="mel")


def gammatone_centers(n_filters: int, f_lo: float, fs: float) -> np.ndarray:
    """ERB-rate spaced centres from f_lo upward, all strictly below Nyquist."""
    nyquist = fs / 2.0
    if not 0 < f_lo < nyquist:
        raise ConfigurationError(f"Gammatone f_lo {f_lo} must lie in (0, {nyquist})")
    e = np.linspace(hz_to_erb_rate(f_lo), hz_to_erb_rate(nyquist), n_filters, endpoint=False)
    return erb_rate_to_hz(e)


def gammatone_filterbank(n_filters: int = 24, n_fft: int = 512, fs: float = 16000.0,
                         f_lo: float = GAMMATONE_F_LO) -> FilterbankMatrix:
    """
    Magnitude responses of 4th-order gammatone filters sampled at the FFT bins.

    Each row is normalised to a peak of 1.
    """
    if n_filters < 1:
        raise ConfigurationError(f"n_filters must be >= 1, got {n_filters}")

    centers = gammatone_centers(n_filters, f_lo, fs)
    freqs = fft_bin_freqs(n_fft, fs)
    weights = np.empty((n_filters, len(freqs)))
    for i, fc in enumerate(centers):
        b, a = gammatone(fc, "iir", fs=fs)
        _, h = freqz(b, a, worN=freqs, fs=fs)
        mag = np.abs(h)
        weights[i] = mag / mag.max()

    return FilterbankMatrix(weights=weights, center_freqs=centers, scale_kind="gammatone")


def apply_filterbank(spec: np.ndarray, fb: FilterbankMatrix, frame_rate: float) -> TimeFrequencyMatrix:
    if spec.shape[0] != fb.weights.shape[1]:
        raise ConfigurationError(
            f"Filterbank expects {fb.weights.shape[1]} FFT bins, spectrum has {spec.shape[0]}"
        )
    return TimeFrequencyMatrix(values=fb.weights @ spec, bin_freqs=fb.center_freqs, frame_rate=frame_rate)


def mfsc(buf: AudioBuffer, n_filters: int = 24, frame_len: int = 320, hop: int = 64, n_fft: int = 512,
         fb: Optional[FilterbankMatrix] = None) -> TimeFrequencyMatrix:
    """Mel-weighted STFT power; no log here."""
    spec = stft(buf, frame_len=frame_len, hop=hop, n_fft=n_fft)
    fb = fb or mel_filterbank(n_filters, n_fft, buf.rate)
    return apply_filterbank(np.abs(spec.values) ** 2, fb, spec.frame_rate)


def gammatone_spectrogram(buf: AudioBuffer, n_filters: int = 24, frame_len: int = 320, hop: int = 64,
                          n_fft: int = 512, fb: Optional[FilterbankMatrix] = None) -> TimeFrequencyMatrix:
    """Gammatone-weighted STFT magnitude, same frame geometry as mfsc."""
    spec = stft(buf, frame_len=frame_len, hop=hop, n_fft=n_fft)
    fb = fb or gammatone_filterbank(n_filters, n_fft, buf.rate)
    return apply_filterbank(np.abs(spec.values), fb, spec.frame_rate)
