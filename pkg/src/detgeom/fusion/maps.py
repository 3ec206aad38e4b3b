"""Dense feature-map value type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FeatureMap"]


@dataclass(frozen=True)
class FeatureMap:
    """A (channels, height, width) float64 array with finite entries."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected a rank-3 array, got shape {arr.shape}")
        if 0 in arr.shape:
            raise ValueError(f"all dimensions must be positive, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature map contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]
