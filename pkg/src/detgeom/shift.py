"""Distribution-shift auditing and offset-sensitivity sweeps.

Domains are compared through 256-bin intensity histograms pooled over all
pixels of all images, scored with the Jensen-Shannon divergence in natural
log (maximum ``ln 2``).  The sweep fixes a square reference box at the
origin, slides an equal- or scaled-size predicted box along the diagonal,
and samples each requested metric at every center offset; the smoothness
report condenses each curve to its maximum absolute finite-difference slope.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .geometry import Box
from .metrics import CombinedParams, MetricKind, NwdParams, metric_value

__all__ = [
    "Histogram",
    "SweepConfig",
    "SweepCurve",
    "SmoothnessRow",
    "intensity_histogram",
    "js_divergence",
    "sweep",
    "smoothness_report",
]

_DEFAULT_BINS = 256


@dataclass(frozen=True)
class Histogram:
    """Normalized discrete intensity distribution."""

    probs: np.ndarray
    bin_count: int = _DEFAULT_BINS

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size != self.bin_count:
            raise ValueError(
                f"expected {self.bin_count} probabilities, got shape {probs.shape}"
            )
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {total}")

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "Histogram":
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise ValueError("histogram needs at least one counted pixel")
        return cls(probs=counts / total, bin_count=counts.size)


def intensity_histogram(images: Iterable[np.ndarray]) -> Histogram:
    """Pool 8-bit grayscale pixel counts over all images into one histogram."""
    counts = np.zeros(_DEFAULT_BINS, dtype=np.int64)
    seen = False
    for img in images:
        arr = np.asarray(img)
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got dtype {arr.dtype}")
        counts += np.bincount(arr.ravel(), minlength=_DEFAULT_BINS)
        seen = True
    if not seen:
        raise ValueError("at least one image is required")
    return Histogram.from_counts(counts)


def js_divergence(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence, natural log; 0 iff equal, at most ln 2."""
    if p.bin_count != q.bin_count:
        raise ValueError(
            f"bin counts differ: {p.bin_count} vs {q.bin_count}"
        )
    pp, qq = p.probs, q.probs
    m = 0.5 * (pp + qq)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_pm = np.where(pp > 0, pp * np.log(pp / m), 0.0)
        kl_qm = np.where(qq > 0, qq * np.log(qq / m), 0.0)
    return float(0.5 * kl_pm.sum() + 0.5 * kl_qm.sum())


@dataclass(frozen=True)
class SweepConfig:
    """Diagonal center-offset sweep parameters.

    ``pred_scale`` sets the predicted box side as a fraction of the reference
    side (1.0 = equal sizes, 0.5 = half size).  The offset axis is the
    center-to-center distance in pixels, applied as ``d/sqrt(2)`` per axis.
    """

    box_sizes: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0)
    max_offset: float = 16.0
    step: float = 0.5
    pred_scale: float = 1.0
    metrics: tuple[MetricKind, ...] = (MetricKind.IOU, MetricKind.CIOU, MetricKind.NWD)

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.pred_scale <= 0:
            raise ValueError(f"pred_scale must be positive, got {self.pred_scale}")
        if self.max_offset < 0:
            raise ValueError(f"max_offset must be >= 0, got {self.max_offset}")
        if not self.box_sizes or any(s <= 0 for s in self.box_sizes):
            raise ValueError("box_sizes must be positive")
        if not self.metrics:
            raise ValueError("at least one metric is required")

    def offsets(self) -> list[float]:
        n = int(round(self.max_offset / self.step))
        return [i * self.step for i in range(n + 1)]


@dataclass(frozen=True)
class SweepCurve:
    """Sampled (offset, metric value) series for one metric and box size."""

    metric: MetricKind
    box_size: float
    samples: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SmoothnessRow:
    metric: MetricKind
    box_size: float
    max_abs_slope: float


def sweep(
    cfg: SweepConfig,
    nwd_params: NwdParams | None = None,
    combined_params: CombinedParams | None = None,
) -> list[SweepCurve]:
    """One curve per (metric, box size) over the configured diagonal offsets."""
    nwd_params = nwd_params or NwdParams()
    combined_params = combined_params or CombinedParams(nwd=nwd_params)
    curves: list[SweepCurve] = []
    for kind in cfg.metrics:
        if kind is MetricKind.NWD:
            params: NwdParams | CombinedParams | None = nwd_params
        elif kind is MetricKind.COMBINED:
            params = combined_params
        else:
            params = None
        for size in cfg.box_sizes:
            g = Box(cx=0.0, cy=0.0, w=size, h=size)
            samples = []
            for d in cfg.offsets():
                shift_per_axis = d / math.sqrt(2.0)
                p = Box(
                    cx=shift_per_axis,
                    cy=shift_per_axis,
                    w=cfg.pred_scale * size,
                    h=cfg.pred_scale * size,
                )
                samples.append((d, metric_value(kind, p, g, params)))
            curves.append(SweepCurve(metric=kind, box_size=size, samples=tuple(samples)))
    return curves


def smoothness_report(curves: Sequence[SweepCurve]) -> list[SmoothnessRow]:
    """Maximum absolute finite-difference slope of each curve."""
    rows = []
    for curve in curves:
        if len(curve.samples) < 2:
            raise ValueError(
                f"curve ({curve.metric.value}, size {curve.box_size}) needs >= 2 samples"
            )
        max_slope = 0.0
        for (d0, v0), (d1, v1) in zip(curve.samples, curve.samples[1:]):
            max_slope = max(max_slope, abs((v1 - v0) / (d1 - d0)))
        rows.append(
            SmoothnessRow(metric=curve.metric, box_size=curve.box_size, max_abs_slope=max_slope)
        )
    return rows
