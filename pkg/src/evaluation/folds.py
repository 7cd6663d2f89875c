"""
Leave-one-speaker-out fold construction
"""

from dataclasses import dataclass
from typing import List

from src.audio.models import DatasetManifest, UtteranceRecord
from src.errors import ConfigurationError


@dataclass
class LosoFold:
    index: int
    test_speaker: str
    val_speaker: str
    train_records: List[UtteranceRecord]
    val_records: List[UtteranceRecord]
    test_records: List[UtteranceRecord]

    @property
    def train_speakers(self) -> List[str]:
        return sorted({r.speaker for r in self.train_records})


def loso_folds(manifest: DatasetManifest) -> List[LosoFold]:
    """One fold per sorted speaker; validation is the next speaker, cyclically."""
    speakers = manifest.speakers()
    if len(speakers) < 3:
        raise ConfigurationError(f"LOSO needs >= 3 speakers, manifest has {len(speakers)}: {speakers}")

    folds = []
    for i, test in enumerate(speakers):
        val = speakers[(i + 1) % len(speakers)]
        fold = LosoFold(
            index=i,
            test_speaker=test,
            val_speaker=val,
            train_records=[r for r in manifest.records if r.speaker not in (test, val)],
            val_records=[r for r in manifest.records if r.speaker == val],
            test_records=[r for r in manifest.records if r.speaker == test],
        )
        assert_disjoint(fold)
        folds.append(fold)
    return folds


def assert_disjoint(fold: LosoFold):
    train = set(fold.train_speakers)
    if fold.test_speaker == fold.val_speaker or fold.test_speaker in train or fold.val_speaker in train:
        raise ConfigurationError(f"Fold {fold.index}: speaker sets overlap")
