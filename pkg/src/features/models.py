"""
Time-frequency and modulation data models
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from src.errors import ConfigurationError


class FeatureKind(Enum):
    """Feature pipelines accepted by extraction and evaluation"""
    CQT = "cqt"
    MFSC = "mfsc"
    GMT = "gmt"
    CQT_MSF = "cqt-msf"
    MFSC_MSF = "mfsc-msf"
    GMT_MSF = "gmt-msf"
    MSF_ONLY_CQT = "msf-only-cqt"
    MSF_ONLY_MFSC = "msf-only-mfsc"

    @property
    def front_end(self) -> str:
        """Early-auditory representation the kind is built on (cqt/mfsc/gmt)."""
        v = self.value
        if v.startswith("msf-only-"):
            return v[len("msf-only-"):]
        return v.split("-")[0]

    @property
    def has_modulation(self) -> bool:
        return "msf" in self.value

    @property
    def has_auditory_rows(self) -> bool:
        return not self.value.startswith("msf-only-")


@dataclass(frozen=True)
class CqtAtom:
    """Single constant-Q atom: centre frequency, length, windowed kernel"""
    freq: float
    length: int
    kernel: np.ndarray


@dataclass
class CqtAtomSet:
    """Designed constant-Q analysis atoms, ordered low to high"""
    f_min: float
    f_max: float
    bins_per_octave: int
    q: float
    fs: float
    atoms: List[CqtAtom]

    @property
    def freqs(self) -> np.ndarray:
        return np.array([a.freq for a in self.atoms])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([a.length for a in self.atoms], dtype=np.int64)

    @property
    def n_octaves(self) -> int:
        return octave_count(self.f_min, self.f_max)

    def __len__(self) -> int:
        return len(self.atoms)


def octave_count(f_min: float, f_max: float) -> int:
    """Number of octaves spanned, ceil(log2(f_max / f_min))."""
    return int(math.ceil(math.log2(f_max / f_min) - 1e-12))


@dataclass
class TimeFrequencyMatrix:
    """Rows = frequency bins (low to high), columns = frames"""
    values: np.ndarray
    bin_freqs: np.ndarray
    frame_rate: float

    def __post_init__(self):
        self.bin_freqs = np.asarray(self.bin_freqs, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.bin_freqs):
            raise ConfigurationError(
                f"TimeFrequencyMatrix rows {self.values.shape} do not match {len(self.bin_freqs)} bin frequencies"
            )

    @property
    def n_bins(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[1])

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


@dataclass
class FilterbankMatrix:
    """Non-negative spectral weights (n_filters x n_fft_bins)"""
    weights: np.ndarray
    center_freqs: np.ndarray
    scale_kind: str  # mel | gammatone

    @property
    def n_filters(self) -> int:
        return int(self.weights.shape[0])


@dataclass
class ModulationFilterbank:
    """Octave-spaced constant-Q filters applied to envelope trajectories"""
    centers: np.ndarray
    q_mod: float
    env_rate: float
    kernels: List[np.ndarray]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(k) for k in self.kernels], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.kernels)


@dataclass
class ModulationTensor:
    """|Y(t, af, mf)| as [auditory bin x modulation bin x frame]"""
    values: np.ndarray
    af_freqs: np.ndarray
    mf_freqs: np.ndarray
    frame_rate: float = 0.0

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.values.shape)


@dataclass(frozen=True)
class RowDescriptor:
    """Where one fused row came from"""
    source: str  # auditory | modulation
    af_index: int
    mf_index: Optional[int] = None


@dataclass
class FusedFeature:
    """Stacked auditory and modulation rows (C + C*M) x T"""
    values: np.ndarray
    row_layout: List[RowDescriptor]
    af_freqs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mf_freqs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    frame_rate: float = 0.0

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[1])
