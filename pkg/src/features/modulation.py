"""
Modulation spectral features: constant-Q filtering of envelope trajectories.

Every auditory row |Y(t, af)| is convolved with each modulation kernel and the
modulus taken, giving |Y(t, af, mf)|. Fusion stacks the auditory rows on top
of the modulation rows, af-major.
"""

import logging
from typing import List, Tuple, Union

import numpy as np
from scipy.signal import fftconvolve

from .cqt import atom_length, make_atom
from .models import FusedFeature, ModulationFilterbank, ModulationTensor, RowDescriptor, TimeFrequencyMatrix
from src.errors import ConfigurationError

logger = logging.getLogger(__name__)

LOG_EPS = 1e-10


def design_modulation_filterbank(f0: float = 0.5, n_channels: int = 8, q_mod: float = 1.0,
                                 env_rate: float = 250.0) -> ModulationFilterbank:
    """Octave-spaced centres f0 * 2^k with one atom per octave at the envelope rate."""
    if not f0 > 0:
        raise ConfigurationError(f"f0 must be positive, got {f0}")
    if n_channels < 1:
        raise ConfigurationError(f"n_channels must be >= 1, got {n_channels}")
    if not q_mod > 0:
        raise ConfigurationError(f"q_mod must be positive, got {q_mod}")

    centers = f0 * 2.0 ** np.arange(n_channels)
    if centers[-1] >= env_rate / 2.0:
        raise ConfigurationError(
            f"Top modulation centre {centers[-1]} Hz is at or above envelope Nyquist {env_rate / 2.0} Hz"
        )

    kernels = [make_atom(c, atom_length(c, q_mod, env_rate, 1), env_rate) for c in centers]
    return ModulationFilterbank(centers=centers, q_mod=q_mod, env_rate=env_rate, kernels=kernels)


def envelope(tf: TimeFrequencyMatrix) -> TimeFrequencyMatrix:
    """Elementwise modulus of the coefficients."""
    return TimeFrequencyMatrix(values=np.abs(tf.values), bin_freqs=tf.bin_freqs, frame_rate=tf.frame_rate)


def msf(env: TimeFrequencyMatrix, fb: ModulationFilterbank, remove_mean: bool = True) -> ModulationTensor:
    """
    Modulation tensor [C x M x T] of an envelope matrix.

    Convolution is "same" length with zero-padded edges. With remove_mean
    each row's mean is subtracted first, so no channel sees the DC term.
    Without it, q_mod = 1 atoms pass the mean at about a quarter of the
    envelope level in every channel.
    """
    if not np.isclose(fb.env_rate, env.frame_rate, rtol=1e-9, atol=0.0):
        raise ConfigurationError(
            f"Modulation filterbank rate {fb.env_rate} Hz does not match frame rate {env.frame_rate} Hz"
        )
    if env.is_complex:
        raise ConfigurationError("msf expects an envelope (magnitude) matrix; apply envelope() first")

    rows = np.asarray(env.values, dtype=np.float64)
    if remove_mean:
        rows = rows - rows.mean(axis=1, keepdims=True)

    C, T = rows.shape
    values = np.empty((C, len(fb), T), dtype=np.float64)
    for m, kernel in enumerate(fb.kernels):
        values[:, m, :] = np.abs(fftconvolve(rows, kernel[None, :], mode="same", axes=1))

    return ModulationTensor(values=values, af_freqs=env.bin_freqs.copy(), mf_freqs=fb.centers.copy(),
                            frame_rate=env.frame_rate)


def _layout(C: int, M: int, with_auditory: bool) -> List[RowDescriptor]:
    layout = [RowDescriptor("auditory", c) for c in range(C)] if with_auditory else []
    layout.extend(RowDescriptor("modulation", c, m) for c in range(C) for m in range(M))
    return layout


def fuse(tf: TimeFrequencyMatrix, mod: ModulationTensor) -> FusedFeature:
    """Stack C auditory rows over C*M modulation rows."""
    C, M, T = mod.shape
    if tf.n_bins != C or tf.n_frames != T:
        raise ConfigurationError(
            f"Cannot fuse auditory matrix {tf.values.shape} with modulation tensor {mod.shape}"
        )
    values = np.vstack([tf.values, mod.values.reshape(C * M, T)])
    return FusedFeature(values=values, row_layout=_layout(C, M, True), af_freqs=tf.bin_freqs.copy(),
                        mf_freqs=mod.mf_freqs.copy(), frame_rate=tf.frame_rate)


def modulation_only(mod: ModulationTensor) -> FusedFeature:
    """C*M modulation rows without the auditory block."""
    C, M, T = mod.shape
    return FusedFeature(values=mod.values.reshape(C * M, T).copy(), row_layout=_layout(C, M, False),
                        af_freqs=mod.af_freqs.copy(), mf_freqs=mod.mf_freqs.copy(), frame_rate=mod.frame_rate)


def unfuse(feat: FusedFeature) -> Tuple[TimeFrequencyMatrix, ModulationTensor]:
    """Recover the auditory matrix and modulation tensor from the row layout."""
    C, M = len(feat.af_freqs), len(feat.mf_freqs)
    T = feat.n_frames
    if len(feat.row_layout) != feat.n_rows:
        raise ConfigurationError(f"Row layout has {len(feat.row_layout)} entries for {feat.n_rows} rows")

    auditory = np.zeros((C, T), dtype=feat.values.dtype)
    tensor = np.zeros((C, M, T), dtype=feat.values.dtype)
    for row, desc in enumerate(feat.row_layout):
        if desc.source == "auditory":
            auditory[desc.af_index] = feat.values[row]
        else:
            tensor[desc.af_index, desc.mf_index] = feat.values[row]

    tf = TimeFrequencyMatrix(values=auditory, bin_freqs=feat.af_freqs, frame_rate=feat.frame_rate)
    mod = ModulationTensor(values=tensor, af_freqs=feat.af_freqs, mf_freqs=feat.mf_freqs, frame_rate=feat.frame_rate)
    return tf, mod


FeatureLike = Union[FusedFeature, TimeFrequencyMatrix]


def log_compress(feat: FeatureLike, eps: float = LOG_EPS) -> FeatureLike:
    """Elementwise log10(x + eps), returning the same type."""
    if not eps > 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    values = np.asarray(feat.values)
    if np.iscomplexobj(values):
        raise ConfigurationError("log_compress expects magnitudes, got complex values")
    if values.size and values.min() < 0:
        raise ConfigurationError(f"log_compress got a negative entry ({values.min()})")

    out = np.log10(values + eps)
    if isinstance(feat, FusedFeature):
        return FusedFeature(values=out, row_layout=list(feat.row_layout), af_freqs=feat.af_freqs,
                            mf_freqs=feat.mf_freqs, frame_rate=feat.frame_rate)
    return TimeFrequencyMatrix(values=out, bin_freqs=feat.bin_freqs, frame_rate=feat.frame_rate)
