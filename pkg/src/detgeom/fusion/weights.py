"""Named-tensor container: file format, validation, and seeded initialization.

File layout (all integers little-endian):

    [uint64: manifest byte length][manifest JSON, UTF-8][payload]

The manifest is ``{"format": "detgeom-tensors", "version": 1, "tensors":
[{"name", "shape", "offset"}, ...]}`` where ``offset`` is the byte position of
the tensor inside the payload; tensors are C-order little-endian float32.
The same container carries fusion weights and pyramid input/output tensors.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np

__all__ = [
    "FusionWeights",
    "WeightShapeError",
    "TensorFormatError",
    "save_tensors",
    "load_tensors",
    "seeded_tensors",
]

_MAGIC_FORMAT = "detgeom-tensors"
_VERSION = 1
_F32 = np.dtype("<f4")


class WeightShapeError(ValueError):
    """A tensor is missing or its shape contradicts the pyramid layout."""


class TensorFormatError(ValueError):
    """The container file is malformed."""


class FusionWeights:
    """Read-only name -> float64 tensor mapping with shape checking."""

    def __init__(self, tensors: Mapping[str, np.ndarray]):
        self._tensors = {
            name: np.asarray(arr, dtype=np.float64) for name, arr in tensors.items()
        }

    def names(self) -> list[str]:
        return sorted(self._tensors)

    def get(self, name: str, shape: tuple[int, ...]) -> np.ndarray:
        if name not in self._tensors:
            raise WeightShapeError(f"missing tensor {name!r}")
        arr = self._tensors[name]
        if arr.shape != shape:
            raise WeightShapeError(
                f"tensor {name!r} has shape {arr.shape}, expected {shape}"
            )
        return arr

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(self._tensors)


def save_tensors(path: str | Path, tensors: Mapping[str, np.ndarray]) -> None:
    """Write tensors (sorted by name) in the flat binary container format."""
    entries = []
    payload = bytearray()
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype=_F32)
        entries.append(
            {"name": name, "shape": list(arr.shape), "offset": len(payload)}
        )
        payload.extend(arr.tobytes())
    manifest = json.dumps(
        {"format": _MAGIC_FORMAT, "version": _VERSION, "tensors": entries},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(manifest)))
        fh.write(manifest)
        fh.write(bytes(payload))


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    """Read a container file back into a name -> float64 array dict."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise TensorFormatError(f"{path}: truncated header")
    (manifest_len,) = struct.unpack("<Q", raw[:8])
    if len(raw) < 8 + manifest_len:
        raise TensorFormatError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(raw[8:8 + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"{path}: bad manifest: {exc}") from exc
    if manifest.get("format") != _MAGIC_FORMAT:
        raise TensorFormatError(f"{path}: not a {_MAGIC_FORMAT} file")
    payload = raw[8 + manifest_len:]
    out: dict[str, np.ndarray] = {}
    for entry in manifest.get("tensors", []):
        name, shape, offset = entry["name"], tuple(entry["shape"]), entry["offset"]
        count = int(np.prod(shape)) if shape else 1
        end = offset + count * 4
        if offset < 0 or end > len(payload):
            raise TensorFormatError(f"{path}: tensor {name!r} overruns the payload")
        arr = np.frombuffer(payload, dtype=_F32, count=count, offset=offset)
        out[name] = arr.reshape(shape).astype(np.float64)
    return out


def _fan_in(shape: tuple[int, ...]) -> int:
    if len(shape) == 2:
        return shape[1]
    if len(shape) == 4:
        return shape[1] * shape[2] * shape[3]
    return shape[0]


def seeded_tensors(
    manifest: Iterable[tuple[str, tuple[int, ...]]], seed: int
) -> dict[str, np.ndarray]:
    """Deterministic initialization: biases zero, weights ~ N(0, 1/fan_in).

    Tensors are drawn in sorted-name order and quantized to float32 so the
    in-memory values match a save/load round trip exactly.
    """
    rng = np.random.default_rng(seed)
    out: dict[str, np.ndarray] = {}
    for name, shape in sorted(manifest):
        if name.endswith(("bias", ".b1", ".b2", ".bq", ".bk", ".bv", ".bo")):
            arr = np.zeros(shape, dtype=np.float64)
        else:
            scale = 1.0 / np.sqrt(_fan_in(shape))
            arr = rng.normal(0.0, scale, size=shape)
        out[name] = arr.astype(_F32).astype(np.float64)
    return out
