"""
Corpus manifest CSV parsing (path,speaker,emotion,duration_s)
"""

import logging
from pathlib import Path
from typing import Iterable, Union

import pandas as pd

from .models import DatasetManifest, UtteranceRecord
from src.errors import ManifestError

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ["path", "speaker", "emotion", "duration_s"]


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Parse a manifest CSV into records (file order) and a label set
    (distinct emotions in first-appearance order).
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"Manifest not found: {path}")

    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False,
                         encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise ManifestError(f"Empty manifest: {path}") from e
    except pd.errors.ParserError as e:
        raise ManifestError(f"Unparseable manifest {path}: {e}") from e

    columns = [c.strip() for c in df.columns]
    missing = [c for c in MANIFEST_COLUMNS if c not in columns]
    if missing:
        raise ManifestError(f"Manifest {path} missing column(s): {', '.join(missing)}", line=1)
    extra = [c for c in columns if c not in MANIFEST_COLUMNS]
    if extra:
        logger.warning("[Manifest] %s: ignoring unknown column(s) %s", path, ", ".join(extra))
    df.columns = columns
    df = df.fillna("")

    records = []
    seen_paths = {}
    for idx, row in enumerate(df.itertuples(index=False)):
        line = idx + 2  # header is line 1; blank lines keep their rows
        if not any(str(v).strip() for v in row):
            continue
        rec_path = str(row.path).strip()
        speaker = str(row.speaker).strip()
        emotion = str(row.emotion).strip()
        raw_duration = str(row.duration_s).strip()

        for name, value in (("path", rec_path), ("speaker", speaker), ("emotion", emotion)):
            if not value:
                raise ManifestError(f"missing {name} field", line=line)
        try:
            duration = float(raw_duration) if raw_duration else 0.0
        except ValueError as e:
            raise ManifestError(f"invalid duration_s {raw_duration!r}", line=line) from e

        if rec_path in seen_paths:
            raise ManifestError(f"duplicate path {rec_path!r} (first seen on line {seen_paths[rec_path]})", line=line)
        seen_paths[rec_path] = line

        records.append(UtteranceRecord(path=rec_path, speaker=speaker, emotion=emotion, duration_s=duration))

    if not records:
        raise ManifestError(f"Empty manifest: {path}")
    return DatasetManifest(records=records, root=path.parent)


def write_manifest(path: Union[str, Path], records: Iterable[UtteranceRecord]) -> Path:
    """Write records with the exact manifest header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(
        [[r.path, r.speaker, r.emotion, r.duration_s] for r in records],
        columns=MANIFEST_COLUMNS,
    )
    df.to_csv(path, index=False, encoding="utf-8")
    return path
