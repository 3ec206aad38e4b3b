"""Pairwise box similarity measures and regression losses.

All functions take boxes in center-size form and return plain floats.  The
IoU family follows the published definitions:

* GIoU  = IoU - (hull - union) / hull
* DIoU  = IoU - center_dist^2 / hull_diag^2
* CIoU  = DIoU - alpha * v, with v the squared scaled arctan aspect gap and
  alpha = v / ((1 - IoU) + v) treated as a constant during differentiation
* EIoU  = IoU - center_dist^2 / hull_diag^2 - dw^2 / hull_w^2 - dh^2 / hull_h^2
  (the "efficient" split of the width/height penalty)
* SIoU  = IoU - (distance_cost + shape_cost) / 2 with the angle-modulated
  distance cost and the quartic shape cost (the "SCYLLA" formulation)

The Wasserstein measure models each box as a 2-D Gaussian; the squared
second-order distance collapses to the squared 2-norm of the difference of
the ``[cx, cy, w/2, h/2]`` vectors, and the similarity is ``exp(-sqrt(.)/c)``.
The combined loss is ``(1 - CIoU) + beta * (1 - NWD)``.

Degenerate boxes are rejected upstream by :class:`detgeom.geometry.Box`, so no
epsilon floors appear in any formula here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .geometry import Box

__all__ = [
    "MetricKind",
    "NwdParams",
    "CombinedParams",
    "DEFAULT_NWD_C",
    "DEFAULT_COMBINED_BETA",
    "iou",
    "giou",
    "diou",
    "ciou",
    "eiou",
    "siou",
    "wasserstein2_sq",
    "nwd",
    "nwd_loss",
    "combined_loss",
    "metric_value",
]

# Default normalization constant for the Wasserstein similarity (pixels) and
# default weight of the Wasserstein term in the combined loss.
DEFAULT_NWD_C = 43.0
DEFAULT_COMBINED_BETA = 0.5


class MetricKind(enum.Enum):
    """Every supported similarity measure plus the combined loss."""

    IOU = "iou"
    GIOU = "giou"
    DIOU = "diou"
    CIOU = "ciou"
    EIOU = "eiou"
    SIOU = "siou"
    NWD = "nwd"
    COMBINED = "combined"


@dataclass(frozen=True)
class NwdParams:
    """Normalization constant for the Wasserstein similarity, in pixels."""

    c: float = DEFAULT_NWD_C

    def __post_init__(self) -> None:
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"c must be a positive finite number, got {self.c}")


@dataclass(frozen=True)
class CombinedParams:
    """Weight of the Wasserstein loss term in the combined loss."""

    beta: float = DEFAULT_COMBINED_BETA
    nwd: NwdParams = field(default_factory=NwdParams)

    def __post_init__(self) -> None:
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be >= 0 and finite, got {self.beta}")


def _corners(b: Box) -> tuple[float, float, float, float]:
    return b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2


def _intersection_union(p: Box, g: Box) -> tuple[float, float]:
    px1, py1, px2, py2 = _corners(p)
    gx1, gy1, gx2, gy2 = _corners(g)
    iw = min(px2, gx2) - max(px1, gx1)
    ih = min(py2, gy2) - max(py1, gy1)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = p.area() + g.area() - inter
    return inter, union


def _hull_extents(p: Box, g: Box) -> tuple[float, float]:
    px1, py1, px2, py2 = _corners(p)
    gx1, gy1, gx2, gy2 = _corners(g)
    return max(px2, gx2) - min(px1, gx1), max(py2, gy2) - min(py1, gy1)


def iou(p: Box, g: Box) -> float:
    """Intersection over union; 1 for identical boxes, 0 when disjoint.

    Boxes that merely touch have measure-zero intersection and evaluate to 0.
    """
    inter, union = _intersection_union(p, g)
    return inter / union


def giou(p: Box, g: Box) -> float:
    """Generalized IoU: subtracts the hull area not covered by the union."""
    inter, union = _intersection_union(p, g)
    cw, ch = _hull_extents(p, g)
    hull = cw * ch
    return inter / union - (hull - union) / hull


def diou(p: Box, g: Box) -> float:
    """Distance IoU: subtracts the normalized squared center distance."""
    inter, union = _intersection_union(p, g)
    cw, ch = _hull_extents(p, g)
    rho2 = (p.cx - g.cx) ** 2 + (p.cy - g.cy) ** 2
    return inter / union - rho2 / (cw * cw + ch * ch)


def _aspect_term(p: Box, g: Box) -> float:
    return (4.0 / math.pi**2) * (math.atan(g.w / g.h) - math.atan(p.w / p.h)) ** 2


def ciou(p: Box, g: Box) -> float:
    """Complete IoU: DIoU plus the weighted aspect-ratio penalty."""
    base = diou(p, g)
    v = _aspect_term(p, g)
    if v == 0.0:
        return base
    alpha = v / ((1.0 - iou(p, g)) + v)
    return base - alpha * v


def eiou(p: Box, g: Box) -> float:
    """Efficient IoU: width and height penalties split against the hull."""
    inter, union = _intersection_union(p, g)
    cw, ch = _hull_extents(p, g)
    rho2 = (p.cx - g.cx) ** 2 + (p.cy - g.cy) ** 2
    return (
        inter / union
        - rho2 / (cw * cw + ch * ch)
        - (p.w - g.w) ** 2 / (cw * cw)
        - (p.h - g.h) ** 2 / (ch * ch)
    )


def siou(p: Box, g: Box) -> float:
    """SCYLLA IoU: angle-modulated distance cost plus quartic shape cost."""
    inter, union = _intersection_union(p, g)
    cw, ch = _hull_extents(p, g)
    s_cw = g.cx - p.cx
    s_ch = g.cy - p.cy
    sigma = math.hypot(s_cw, s_ch)
    if sigma == 0.0:
        distance_cost = 0.0
    else:
        sin_alpha = abs(s_cw) / sigma
        if sin_alpha > math.sqrt(2.0) / 2.0:
            sin_alpha = abs(s_ch) / sigma
        angle_cost = math.cos(2.0 * math.asin(sin_alpha) - math.pi / 2.0)
        gamma = angle_cost - 2.0
        rho_x = (s_cw / cw) ** 2
        rho_y = (s_ch / ch) ** 2
        distance_cost = 2.0 - math.exp(gamma * rho_x) - math.exp(gamma * rho_y)
    omega_w = abs(p.w - g.w) / max(p.w, g.w)
    omega_h = abs(p.h - g.h) / max(p.h, g.h)
    shape_cost = (1.0 - math.exp(-omega_w)) ** 4 + (1.0 - math.exp(-omega_h)) ** 4
    return inter / union - 0.5 * (distance_cost + shape_cost)


def wasserstein2_sq(p: Box, g: Box) -> float:
    """Squared second-order Wasserstein distance between the Gaussian models."""
    return (
        (p.cx - g.cx) ** 2
        + (p.cy - g.cy) ** 2
        + ((p.w - g.w) / 2.0) ** 2
        + ((p.h - g.h) / 2.0) ** 2
    )


def nwd(p: Box, g: Box, params: NwdParams | None = None) -> float:
    """Normalized Wasserstein similarity in (0, 1]; 1 iff the boxes coincide."""
    c = (params or NwdParams()).c
    return math.exp(-math.sqrt(wasserstein2_sq(p, g)) / c)


def nwd_loss(p: Box, g: Box, params: NwdParams | None = None) -> float:
    """Wasserstein regression loss ``1 - nwd`` in [0, 1)."""
    return 1.0 - nwd(p, g, params)


def combined_loss(p: Box, g: Box, params: CombinedParams | None = None) -> float:
    """Combined regression loss ``(1 - ciou) + beta * (1 - nwd)``."""
    params = params or CombinedParams()
    return (1.0 - ciou(p, g)) + params.beta * nwd_loss(p, g, params.nwd)


def metric_value(kind: MetricKind, p: Box, g: Box,
                 params: NwdParams | CombinedParams | None = None) -> float:
    """Evaluate one metric by kind.

    IoU-family kinds and NWD are similarities; COMBINED is the loss.
    """
    if kind is MetricKind.IOU:
        return iou(p, g)
    if kind is MetricKind.GIOU:
        return giou(p, g)
    if kind is MetricKind.DIOU:
        return diou(p, g)
    if kind is MetricKind.CIOU:
        return ciou(p, g)
    if kind is MetricKind.EIOU:
        return eiou(p, g)
    if kind is MetricKind.SIOU:
        return siou(p, g)
    if kind is MetricKind.NWD:
        if params is not None and not isinstance(params, NwdParams):
            raise TypeError("nwd expects NwdParams")
        return nwd(p, g, params)
    if kind is MetricKind.COMBINED:
        if params is not None and not isinstance(params, CombinedParams):
            raise TypeError("combined expects CombinedParams")
        return combined_loss(p, g, params)
    raise ValueError(f"unknown metric kind: {kind!r}")
