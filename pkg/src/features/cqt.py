"""
Constant-Q transform: atom design and frame-wise evaluation.

Atoms are Hann-windowed complex exponentials a_k(n) = w(n)/N_k * exp(i*2*pi*f_k*n/fs)
with f_k = f_min * 2^((k-1)/B) and N_k = round(q*fs / (f_k*(2^(1/B) - 1))).
Coefficient k at frame n is the inner product of the signal window centred on
sample n*hop with the conjugated atom; samples outside the signal are zero.
"""

import logging
import math
from typing import List

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve, get_window, resample_poly

from .models import CqtAtom, CqtAtomSet, TimeFrequencyMatrix, octave_count
from src.audio.models import AudioBuffer
from src.errors import ConfigurationError

logger = logging.getLogger(__name__)

CQT_METHODS = ("direct", "fft", "decimated")


def atom_length(freq: float, q: float, fs: float, bins_per_octave: int) -> int:
    """Constant-Q window length, rounded to the nearest sample."""
    return int(round(q * fs / (freq * (2.0 ** (1.0 / bins_per_octave) - 1.0))))


def make_atom(freq: float, length: int, fs: float) -> np.ndarray:
    """Hann-windowed complex exponential, normalised by 1/length, phase-centred."""
    length = max(int(length), 1)
    window = get_window("hann", length, fftbins=True) if length > 1 else np.ones(1)
    n = np.arange(length) - length // 2
    return window / length * np.exp(2j * np.pi * freq * n / fs)


def design_cqt_atoms(f_min: float, f_max: float, bins_per_octave: int = 3, q: float = 1.0,
                     fs: float = 16000.0) -> CqtAtomSet:
    """Design all atoms with f_k <= f_max."""
    nyquist = fs / 2.0
    if not f_min > 0:
        raise ConfigurationError(f"f_min must be positive, got {f_min}")
    if f_min >= nyquist:
        raise ConfigurationError(f"f_min {f_min} Hz is at or above Nyquist {nyquist} Hz")
    if not f_min < f_max:
        raise ConfigurationError(f"f_min {f_min} must be below f_max {f_max}")
    if f_max > nyquist * (1 + 1e-12):
        raise ConfigurationError(f"f_max {f_max} Hz exceeds Nyquist {nyquist} Hz")
    if bins_per_octave < 1:
        raise ConfigurationError(f"bins_per_octave must be >= 1, got {bins_per_octave}")
    if not q > 0:
        raise ConfigurationError(f"q must be positive, got {q}")

    atoms: List[CqtAtom] = []
    k = 0
    while True:
        freq = f_min * 2.0 ** (k / bins_per_octave)
        if freq > f_max * (1 + 1e-12):
            break
        length = atom_length(freq, q, fs, bins_per_octave)
        atoms.append(CqtAtom(freq=freq, length=length, kernel=make_atom(freq, length, fs)))
        k += 1

    if not atoms:
        raise ConfigurationError(f"No CQT bins between {f_min} and {f_max} Hz")

    return CqtAtomSet(f_min=f_min, f_max=f_max, bins_per_octave=bins_per_octave, q=q, fs=fs, atoms=atoms)


def n_frames_for(n_samples: int, hop: int) -> int:
    return n_samples // hop + 1


def _framewise_inner(x: np.ndarray, kernel: np.ndarray, hop: int, n_frames: int, use_fft: bool) -> np.ndarray:
    """Correlate x with kernel at window starts n*hop - len//2 (zero-padded)."""
    length = len(kernel)
    padded = np.pad(x, (length // 2, length))
    conj = np.conj(kernel)
    if use_fft:
        full = fftconvolve(padded, conj[::-1], mode="valid")
        return full[::hop][:n_frames]
    windows = sliding_window_view(padded, length)[::hop][:n_frames]
    return windows @ conj


def _check_hop(hop: int):
    if int(hop) != hop or hop < 1:
        raise ConfigurationError(f"hop must be a positive integer, got {hop}")


def cqt(buf: AudioBuffer, atoms: CqtAtomSet, hop: int = 64, method: str = "direct") -> TimeFrequencyMatrix:
    """
    Complex CQT with floor(len/hop) + 1 frames.

    method="direct" evaluates every atom at every hop-aligned frame centre, so
    any positive hop is valid. method="fft" gives the same numbers through FFT
    correlation. method="decimated" halves the sampling rate per octave and
    requires hop to be a multiple of 2^(octave count).
    """
    _check_hop(hop)
    hop = int(hop)
    if float(buf.rate) != float(atoms.fs):
        raise ConfigurationError(f"Buffer rate {buf.rate} Hz does not match atom rate {atoms.fs} Hz")
    if method not in CQT_METHODS:
        raise ConfigurationError(f"Unknown CQT method {method!r}, expected one of {CQT_METHODS}")
    buf.require_samples()

    x = buf.samples
    n_frames = n_frames_for(len(x), hop)

    if method == "decimated":
        values = _cqt_decimated(x, atoms, hop, n_frames)
    else:
        use_fft = method == "fft"
        values = np.empty((len(atoms), n_frames), dtype=np.complex128)
        for k, atom in enumerate(atoms.atoms):
            values[k] = _framewise_inner(x, atom.kernel, hop, n_frames, use_fft)

    return TimeFrequencyMatrix(values=values, bin_freqs=atoms.freqs, frame_rate=atoms.fs / hop)


def _cqt_decimated(x: np.ndarray, atoms: CqtAtomSet, hop: int, n_frames: int) -> np.ndarray:
    """Octave-wise evaluation on a signal decimated by 2 per octave below the top one."""
    n_oct = atoms.n_octaves
    if hop % (2 ** n_oct) != 0:
        raise ConfigurationError(
            f"hop {hop} must be an integer multiple of 2^{n_oct} = {2 ** n_oct} for the decimated CQT"
        )

    B = atoms.bins_per_octave
    K = len(atoms)
    values = np.empty((K, n_frames), dtype=np.complex128)

    signal = x
    fs = atoms.fs
    level = 0
    top = K
    while top > 0:
        bottom = max(0, top - B)
        level_hop = hop // (2 ** level)
        for k in range(bottom, top):
            freq = atoms.atoms[k].freq
            length = atom_length(freq, atoms.q, fs, B)
            values[k] = _framewise_inner(signal, make_atom(freq, length, fs), level_hop, n_frames, use_fft=False)
        top = bottom
        if top > 0:
            signal = resample_poly(signal, 1, 2)
            fs = fs / 2.0
            level += 1

    logger.debug("[CQT] Decimated evaluation over %d levels", level + 1)
    return values


def magnitude(tf: TimeFrequencyMatrix) -> TimeFrequencyMatrix:
    """Elementwise modulus with geometry unchanged."""
    return TimeFrequencyMatrix(values=np.abs(tf.values), bin_freqs=tf.bin_freqs, frame_rate=tf.frame_rate)


__all__ = [
    "CQT_METHODS",
    "atom_length",
    "make_atom",
    "design_cqt_atoms",
    "cqt",
    "magnitude",
    "n_frames_for",
    "octave_count",
]
