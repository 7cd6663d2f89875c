"""
Audio module exports
"""

from .models import AudioBuffer, UtteranceRecord, DatasetManifest
from .wav import read_wav, write_wav, resample
from .manifest import load_manifest, write_manifest, MANIFEST_COLUMNS
from .segment import segment_features, segment_stride
from .synthetic import am_tone, generate_am_corpus

__all__ = [
    "AudioBuffer",
    "UtteranceRecord",
    "DatasetManifest",
    "read_wav",
    "write_wav",
    "resample",
    "load_manifest",
    "write_manifest",
    "MANIFEST_COLUMNS",
    "segment_features",
    "segment_stride",
    "am_tone",
    "generate_am_corpus",
]
