"""
Feature module exports
"""

from .models import (
    FeatureKind,
    CqtAtom,
    CqtAtomSet,
    TimeFrequencyMatrix,
    FilterbankMatrix,
    ModulationFilterbank,
    ModulationTensor,
    RowDescriptor,
    FusedFeature,
    octave_count,
)
from .cqt import design_cqt_atoms, cqt, magnitude
from .spectral import (
    hz_to_mel,
    mel_to_hz,
    erb_bandwidth,
    hz_to_erb_rate,
    erb_rate_to_hz,
    stft,
    mel_filterbank,
    mfsc,
    gammatone_filterbank,
    gammatone_spectrogram,
)
from .modulation import (
    design_modulation_filterbank,
    envelope,
    msf,
    fuse,
    unfuse,
    modulation_only,
    log_compress,
)
from .pipeline import ExtractionConfig, ExtractionResult, FeatureExtractor, extract_manifest
from .feature_file import FeatureFile, write_feature_file, read_feature_file

__all__ = [
    "FeatureKind",
    "CqtAtom",
    "CqtAtomSet",
    "TimeFrequencyMatrix",
    "FilterbankMatrix",
    "ModulationFilterbank",
    "ModulationTensor",
    "RowDescriptor",
    "FusedFeature",
    "octave_count",
    "design_cqt_atoms",
    "cqt",
    "magnitude",
    "hz_to_mel",
    "mel_to_hz",
    "erb_bandwidth",
    "hz_to_erb_rate",
    "erb_rate_to_hz",
    "stft",
    "mel_filterbank",
    "mfsc",
    "gammatone_filterbank",
    "gammatone_spectrogram",
    "design_modulation_filterbank",
    "envelope",
    "msf",
    "fuse",
    "unfuse",
    "modulation_only",
    "log_compress",
    "ExtractionConfig",
    "FeatureExtractor",
    "ExtractionResult",
    "extract_manifest",
    "FeatureFile",
    "write_feature_file",
    "read_feature_file",
]
