"""
CQTMSF01 feature file codec

Layout (little-endian):
    8 bytes   magic "CQTMSF01"
    u32       rows
    u32       cols
    u32       dtype tag (1 = float32)
    rows*cols*4 bytes row-major payload
    UTF-8 metadata, one key=value per line
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .models import FeatureKind, FusedFeature, RowDescriptor
from src.errors import FeatureFileError

MAGIC = b"CQTMSF01"
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<8sIII")


@dataclass
class FeatureFile:
    """Decoded feature file: matrix plus its metadata block"""
    feature: FusedFeature
    kind: Optional[FeatureKind] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def config_json(self) -> Optional[str]:
        return self.metadata.get("config")


def _encode_layout(layout) -> str:
    return json.dumps([[d.source[0], d.af_index, d.mf_index] for d in layout], separators=(",", ":"))


def _decode_layout(text: str):
    sources = {"a": "auditory", "m": "modulation"}
    return [RowDescriptor(sources[s], int(af), None if mf is None else int(mf)) for s, af, mf in json.loads(text)]


def encode_feature_file(feat: FusedFeature, kind: Optional[Union[FeatureKind, str]] = None,
                        config_json: Optional[str] = None, extra: Optional[Dict[str, str]] = None) -> bytes:
    values = np.ascontiguousarray(feat.values, dtype="<f4")
    rows, cols = values.shape
    if len(feat.row_layout) not in (0, rows):
        raise FeatureFileError(f"row layout has {len(feat.row_layout)} entries for {rows} rows")

    meta = {}
    if kind is not None:
        meta["kind"] = FeatureKind(kind).value
    meta["frame_rate"] = repr(float(feat.frame_rate))
    meta["af_freqs"] = json.dumps([float(f) for f in feat.af_freqs])
    meta["mf_freqs"] = json.dumps([float(f) for f in feat.mf_freqs])
    # Empty layout is omitted; the decoder then labels every row auditory
    if feat.row_layout:
        meta["row_layout"] = _encode_layout(feat.row_layout)
    if config_json is not None:
        meta["config"] = config_json.replace("\n", " ")
    for k, v in (extra or {}).items():
        meta[k] = str(v).replace("\n", " ")

    block = "".join(f"{k}={v}\n" for k, v in meta.items()).encode("utf-8")
    return _HEADER.pack(MAGIC, rows, cols, DTYPE_FLOAT32) + values.tobytes() + block


def decode_feature_file(data: bytes, source: str = "<bytes>") -> FeatureFile:
    if len(data) < _HEADER.size:
        raise FeatureFileError(f"{source}: truncated header ({len(data)} bytes)")
    magic, rows, cols, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FeatureFileError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if tag != DTYPE_FLOAT32:
        raise FeatureFileError(f"{source}: unsupported dtype tag {tag}")

    n_bytes = rows * cols * 4
    end = _HEADER.size + n_bytes
    if len(data) < end:
        raise FeatureFileError(f"{source}: payload truncated, expected {n_bytes} bytes")
    values = np.frombuffer(data, dtype="<f4", count=rows * cols, offset=_HEADER.size).reshape(rows, cols).copy()

    metadata: Dict[str, str] = {}
    try:
        text = data[end:].decode("utf-8")
    except UnicodeDecodeError as e:
        raise FeatureFileError(f"{source}: metadata is not UTF-8: {e}") from e
    for n, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FeatureFileError(f"{source}: metadata line {n} is not key=value: {line!r}")
        metadata[key] = value

    try:
        layout = _decode_layout(metadata["row_layout"]) if "row_layout" in metadata else \
            [RowDescriptor("auditory", r) for r in range(rows)]
        af = np.array(json.loads(metadata.get("af_freqs", "[]")), dtype=np.float64)
        mf = np.array(json.loads(metadata.get("mf_freqs", "[]")), dtype=np.float64)
        frame_rate = float(metadata.get("frame_rate", 0.0))
        kind = FeatureKind(metadata["kind"]) if "kind" in metadata else None
    except (ValueError, KeyError, TypeError) as e:
        raise FeatureFileError(f"{source}: corrupt metadata: {e}") from e

    if len(layout) != rows:
        raise FeatureFileError(f"{source}: row layout has {len(layout)} entries for {rows} rows")

    feat = FusedFeature(values=values, row_layout=layout, af_freqs=af, mf_freqs=mf, frame_rate=frame_rate)
    return FeatureFile(feature=feat, kind=kind, metadata=metadata)


def write_feature_file(path: Union[str, Path], feat: FusedFeature, kind: Optional[Union[FeatureKind, str]] = None,
                       config_json: Optional[str] = None, extra: Optional[Dict[str, str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_feature_file(feat, kind, config_json, extra))
    return path


def read_feature_file(path: Union[str, Path]) -> FeatureFile:
    path = Path(path)
    if not path.is_file():
        raise FeatureFileError(f"Feature file not found: {path}")
    return decode_feature_file(path.read_bytes(), source=str(path))
