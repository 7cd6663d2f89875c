"""
MSFNET01 checkpoint codec

Layout (little-endian):
    8 bytes  magic "MSFNET01"
    u32      parameter-array count
    per array, in declaration order:
        u32  kind tag (1 conv weight, 2 conv bias, 3 dense weight, 4 dense bias)
        u32  ndim, then ndim x u32 shape
        float32 payload
    u32      n_classes
    UTF-8 key=value lines: labels, spec, input_rows, seed, config
"""

import json
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .network import NetworkModel, NetworkSpec
from src.errors import FeatureFileError

MAGIC = b"MSFNET01"

KIND_CONV_W = 1
KIND_CONV_B = 2
KIND_DENSE_W = 3
KIND_DENSE_B = 4


def _kind_tag(name: str) -> int:
    layer, _, part = name.partition(".")
    if layer.startswith("conv"):
        return KIND_CONV_W if part == "w" else KIND_CONV_B
    return KIND_DENSE_W if part == "w" else KIND_DENSE_B


def encode_checkpoint(model: NetworkModel, config_json: Optional[str] = None) -> bytes:
    spec = model.spec
    chunks = [MAGIC, struct.pack("<I", len(model.params))]
    for name, arr in model.params.items():
        chunks.append(struct.pack("<II", _kind_tag(name), arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    chunks.append(struct.pack("<I", spec.n_classes))

    meta = {
        "labels": json.dumps(model.label_set),
        "spec": json.dumps({
            "kernel_sizes": list(spec.kernel_sizes),
            "n_filters": spec.n_filters,
            "fc_units": spec.fc_units,
            "dropout_p": spec.dropout_p,
            "input_norm": spec.input_norm,
        }),
        "input_rows": "" if model.input_rows is None else str(model.input_rows),
        "seed": str(model.rng_seed),
    }
    if config_json is not None:
        meta["config"] = config_json.replace("\n", " ")
    chunks.append("".join(f"{k}={v}\n" for k, v in meta.items()).encode("utf-8"))
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FeatureFileError(f"{self.source}: checkpoint truncated at byte {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, count: int = 1):
        values = struct.unpack(f"<{count}I", self.take(4 * count))
        return values[0] if count == 1 else values


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> NetworkModel:
    r = _Reader(data, source)
    magic = r.take(8)
    if magic != MAGIC:
        raise FeatureFileError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")

    arrays = []
    for _ in range(r.u32()):
        tag, ndim = r.u32(2)
        shape = tuple(r.u32(ndim)) if ndim > 1 else (r.u32(),)
        count = int(np.prod(shape))
        payload = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape).astype(np.float32)
        arrays.append((tag, payload))
    n_classes = r.u32()

    meta = {}
    for line in data[r.pos:].decode("utf-8").splitlines():
        key, sep, value = line.partition("=")
        if sep:
            meta[key] = value

    try:
        s = json.loads(meta["spec"])
        spec = NetworkSpec(n_classes=n_classes, kernel_sizes=tuple(s["kernel_sizes"]), n_filters=s["n_filters"],
                           fc_units=s["fc_units"], dropout_p=s["dropout_p"],
                           input_norm=s.get("input_norm", "none"))
        labels = json.loads(meta.get("labels", "[]"))
    except (KeyError, ValueError, TypeError) as e:
        raise FeatureFileError(f"{source}: corrupt checkpoint metadata: {e}") from e

    shapes = spec.parameter_shapes()
    if len(arrays) != len(shapes):
        raise FeatureFileError(f"{source}: {len(arrays)} parameter arrays, spec needs {len(shapes)}")
    params = {}
    for (name, shape), (tag, arr) in zip(shapes.items(), arrays):
        if tag != _kind_tag(name) or arr.shape != shape:
            raise FeatureFileError(f"{source}: array for {name} has tag {tag} shape {arr.shape}, expected {shape}")
        params[name] = arr

    input_rows = int(meta["input_rows"]) if meta.get("input_rows") else None
    return NetworkModel(spec=spec, params=params, rng_seed=int(meta.get("seed", 0)), label_set=labels,
                        input_rows=input_rows)


def save_checkpoint(path: Union[str, Path], model: NetworkModel, config_json: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model, config_json))
    return path


def load_checkpoint(path: Union[str, Path]) -> NetworkModel:
    path = Path(path)
    if not path.is_file():
        raise FeatureFileError(f"Checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes(), source=str(path))
