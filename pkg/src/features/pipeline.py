"""
Feature extraction facade

Maps each FeatureKind to its front-end, modulation and compression steps.
Filter banks are designed once per extractor and shared across utterances.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Union

from .cqt import cqt, design_cqt_atoms, magnitude
from .models import (
    FeatureKind,
    FusedFeature,
    ModulationFilterbank,
    ModulationTensor,
    RowDescriptor,
    TimeFrequencyMatrix,
)
from .modulation import LOG_EPS, design_modulation_filterbank, fuse, log_compress, modulation_only, msf
from .spectral import gammatone_filterbank, gammatone_spectrogram, mel_filterbank, mfsc
from src.audio.models import AudioBuffer, DatasetManifest, UtteranceRecord
from src.audio.wav import read_wav, resample
from src.metrics import inc_utterance, observe_extraction_latency, track_latency

logger = logging.getLogger(__name__)


@dataclass
class ExtractionConfig:
    """Front-end and modulation parameters for one extraction run"""
    rate: float = 16000.0
    # CQT
    f_min: float = 32.7
    f_max: Optional[float] = None  # None = Nyquist
    bins_per_octave: int = 3
    q: float = 1.0
    hop: int = 64
    cqt_method: str = "direct"
    # STFT front-ends
    n_filters: int = 24
    frame_len: int = 320
    stft_hop: int = 64
    n_fft: int = 512
    # Modulation
    mod_f0: float = 0.5
    mod_channels: int = 8
    q_mod: float = 1.0
    envelope_mean_removal: bool = True
    log_eps: float = LOG_EPS

    def to_dict(self) -> dict:
        return asdict(self)


def auditory_only(tf: TimeFrequencyMatrix) -> FusedFeature:
    """Wrap a plain front-end matrix in the fused layout (no modulation rows)."""
    return FusedFeature(
        values=tf.values,
        row_layout=[RowDescriptor("auditory", c) for c in range(tf.n_bins)],
        af_freqs=tf.bin_freqs,
        frame_rate=tf.frame_rate,
    )


class FeatureExtractor:
    """
    Audio -> log-compressed FusedFeature for any FeatureKind

    Usage:
        extractor = FeatureExtractor(ExtractionConfig())
        feat = extractor.extract(buf, FeatureKind.CQT_MSF)  # 216 x T
    """

    def __init__(self, config: Optional[ExtractionConfig] = None):
        self.config = config or ExtractionConfig()
        c = self.config
        self.atoms = design_cqt_atoms(c.f_min, c.f_max or c.rate / 2.0, c.bins_per_octave, c.q, c.rate)
        self._mel = None
        self._gammatone = None
        self._mod_banks: Dict[float, ModulationFilterbank] = {}

    @property
    def mel_bank(self):
        if self._mel is None:
            c = self.config
            self._mel = mel_filterbank(c.n_filters, c.n_fft, c.rate)
        return self._mel

    @property
    def gammatone_bank(self):
        if self._gammatone is None:
            c = self.config
            self._gammatone = gammatone_filterbank(c.n_filters, c.n_fft, c.rate)
        return self._gammatone

    def modulation_bank(self, env_rate: float) -> ModulationFilterbank:
        if env_rate not in self._mod_banks:
            c = self.config
            self._mod_banks[env_rate] = design_modulation_filterbank(c.mod_f0, c.mod_channels, c.q_mod, env_rate)
        return self._mod_banks[env_rate]

    def front_end(self, buf: AudioBuffer, front: str) -> TimeFrequencyMatrix:
        """Magnitude representation (cqt / mfsc / gmt) of a buffer at the working rate."""
        c = self.config
        if front == "cqt":
            return magnitude(cqt(buf, self.atoms, hop=c.hop, method=c.cqt_method))
        if front == "mfsc":
            return mfsc(buf, frame_len=c.frame_len, hop=c.stft_hop, n_fft=c.n_fft, fb=self.mel_bank)
        if front == "gmt":
            return gammatone_spectrogram(buf, frame_len=c.frame_len, hop=c.stft_hop, n_fft=c.n_fft,
                                         fb=self.gammatone_bank)
        raise ValueError(f"Unknown front-end {front!r}")

    def auditory(self, buf: AudioBuffer, front: str) -> TimeFrequencyMatrix:
        """Resample to the working rate, then run the front-end."""
        if buf.rate != self.config.rate:
            buf = resample(buf, self.config.rate)
        return self.front_end(buf, front)

    def modulation(self, tf: TimeFrequencyMatrix) -> ModulationTensor:
        """Linear (uncompressed) modulation tensor of a magnitude matrix."""
        return msf(tf, self.modulation_bank(tf.frame_rate), remove_mean=self.config.envelope_mean_removal)

    def extract(self, buf: AudioBuffer, kind: Union[FeatureKind, str]) -> FusedFeature:
        """Run the full pipeline for one utterance, log compression included."""
        kind = FeatureKind(kind)
        with track_latency(observe_extraction_latency):
            tf = self.auditory(buf, kind.front_end)
            if not kind.has_modulation:
                feat = auditory_only(tf)
            else:
                mod = self.modulation(tf)
                feat = fuse(tf, mod) if kind.has_auditory_rows else modulation_only(mod)

            out = log_compress(feat, self.config.log_eps)

        inc_utterance("success")
        return out


@dataclass
class ExtractionResult:
    """Features keyed by manifest path, plus per-utterance failures"""
    features: Dict[str, FusedFeature] = field(default_factory=dict)
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def extract_manifest(manifest: DatasetManifest, kind: Union[FeatureKind, str], extractor: FeatureExtractor,
                     workers: int = 1) -> ExtractionResult:
    """
    Extract every utterance of a manifest.

    Failures are logged and collected rather than raised; results keep
    manifest order whatever the worker count.
    """
    kind = FeatureKind(kind)

    def _one(record: UtteranceRecord):
        path = manifest.audio_path(record)
        try:
            return extractor.extract(read_wav(path), kind), None
        except Exception as e:
            logger.error("[Extractor] Failed on %s: %s", path, e)
            inc_utterance("error")
            return None, f"{type(e).__name__}: {e}"

    records: List[UtteranceRecord] = list(manifest.records)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="extract_") as pool:
            outcomes = list(pool.map(_one, records))
    else:
        outcomes = [_one(r) for r in records]

    result = ExtractionResult()
    for record, (feat, error) in zip(records, outcomes):
        if error is None:
            result.features[record.path] = feat
        else:
            result.failures[record.path] = error

    logger.info("[Extractor] %s: %d ok, %d failed", kind.value, len(result.features), len(result.failures))
    return result
