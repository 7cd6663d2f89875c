"""
Audio and corpus data models
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from src.errors import AudioError, ManifestError


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample sequence in [-1, 1] with its sampling rate"""
    samples: np.ndarray
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise AudioError(f"Sampling rate must be positive, got {self.rate}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64).reshape(-1))

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) / float(self.rate)

    def require_samples(self) -> "AudioBuffer":
        """Fail fast for downstream transforms that need a non-empty signal."""
        if len(self) == 0:
            raise AudioError("Audio buffer is empty")
        return self


@dataclass(frozen=True)
class UtteranceRecord:
    """One manifest row: audio path plus LOSO grouping keys"""
    path: str
    speaker: str
    emotion: str
    duration_s: float = 0.0

    def __post_init__(self):
        if not str(self.speaker).strip():
            raise ManifestError(f"Empty speaker for {self.path!r}")
        if not str(self.emotion).strip():
            raise ManifestError(f"Empty emotion for {self.path!r}")


@dataclass
class DatasetManifest:
    """Ordered utterance records with their label set"""
    records: List[UtteranceRecord]
    label_set: List[str] = field(default_factory=list)
    root: Optional[Path] = None

    def __post_init__(self):
        if not self.label_set:
            seen = []
            for r in self.records:
                if r.emotion not in seen:
                    seen.append(r.emotion)
            self.label_set = seen
        labels = set(self.label_set)
        for r in self.records:
            if r.emotion not in labels:
                raise ManifestError(f"Emotion {r.emotion!r} of {r.path!r} not in label set {self.label_set}")

    def speakers(self) -> List[str]:
        """Distinct speakers, sorted"""
        return sorted({r.speaker for r in self.records})

    def label_index(self, emotion: str) -> int:
        return self.label_set.index(emotion)

    def audio_path(self, record: UtteranceRecord) -> Path:
        """Resolve a record path relative to the manifest directory."""
        p = Path(record.path)
        if p.is_absolute() or self.root is None:
            return p
        return self.root / p

    def subset(self, records: List[UtteranceRecord]) -> "DatasetManifest":
        """Same label ordering, different records"""
        return DatasetManifest(records=list(records), label_set=list(self.label_set), root=self.root)
