"""Pairwise metric matrices with a compiled core and a numpy fallback.

The compiled Cython extension is tried first; if it is missing (no C
toolchain at install time) or the ``DETGEOM_DISABLE_EXT`` environment
variable is set to a non-empty value other than ``0``, the numpy backend is
used.  Both backends implement the identical contract and are covered by the
same tests; ``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os
from collections.abc import Sequence

import numpy as np

from . import _kernels_py
from .geometry import Box
from .metrics import CombinedParams, MetricKind, NwdParams

__all__ = [
    "BACKEND",
    "COMPILED_AVAILABLE",
    "available_backends",
    "boxes_to_array",
    "pairwise_matrix",
]

_KIND_CODES = {
    MetricKind.IOU: 0,
    MetricKind.GIOU: 1,
    MetricKind.DIOU: 2,
    MetricKind.CIOU: 3,
    MetricKind.EIOU: 4,
    MetricKind.SIOU: 5,
    MetricKind.NWD: 6,
    MetricKind.COMBINED: 7,
}

try:
    from . import _kernels as _ext
except ImportError:  # pragma: no cover - build-dependent
    _ext = None

COMPILED_AVAILABLE = _ext is not None
_disabled = os.environ.get("DETGEOM_DISABLE_EXT", "0") not in ("", "0")
BACKEND = "compiled" if (COMPILED_AVAILABLE and not _disabled) else "python"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if COMPILED_AVAILABLE else ("python",)


def boxes_to_array(boxes: Sequence[Box] | np.ndarray) -> np.ndarray:
    """Stack boxes into a C-contiguous (n, 4) float64 array (cx, cy, w, h)."""
    if isinstance(boxes, np.ndarray):
        arr = np.ascontiguousarray(boxes, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"expected an (n, 4) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("box array contains non-finite values")
        if np.any(arr[:, 2:] <= 0):
            raise ValueError("box array contains non-positive extents")
        return arr
    return np.array([[b.cx, b.cy, b.w, b.h] for b in boxes], dtype=np.float64).reshape(-1, 4)


def pairwise_matrix(
    kind: MetricKind,
    boxes_a: Sequence[Box] | np.ndarray,
    boxes_b: Sequence[Box] | np.ndarray,
    params: NwdParams | CombinedParams | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Metric values for every (a, b) pair as an (len_a, len_b) float64 array.

    ``params`` supplies the Wasserstein constant and, for the combined loss,
    its weight; it is ignored by the pure IoU-family kinds.
    """
    a = boxes_to_array(boxes_a)
    b = boxes_to_array(boxes_b)
    if kind is MetricKind.COMBINED:
        if params is not None and not isinstance(params, CombinedParams):
            raise TypeError("combined expects CombinedParams")
        cp = params or CombinedParams()
        c, beta = cp.nwd.c, cp.beta
    else:
        if kind is MetricKind.NWD and params is not None and not isinstance(params, NwdParams):
            raise TypeError("nwd expects NwdParams")
        nwd_params = params if isinstance(params, NwdParams) else NwdParams()
        c, beta = nwd_params.c, 0.0

    chosen = backend or BACKEND
    if chosen == "compiled":
        if _ext is None:
            raise RuntimeError("compiled kernels are not available in this install")
        return _ext.pairwise(_KIND_CODES[kind], a, b, c, beta)
    if chosen == "python":
        return _kernels_py.pairwise(_KIND_CODES[kind], a, b, c, beta)
    raise ValueError(f"unknown backend {chosen!r}; expected 'compiled' or 'python'")
