"""Analytic gradients of every box metric with respect to all 8 coordinates.

Coordinate order is ``(cx_p, cy_p, w_p, h_p, cx_g, cy_g, w_g, h_g)``.  Each
intermediate quantity is carried as a ``(value, 8-vector)`` pair and combined
by the chain rule, so the returned value is identical to the one produced by
:mod:`detgeom.metrics` and the gradient is exact wherever the metric is
differentiable.

Configurations where a metric has a kink raise :class:`NonDifferentiableError`
instead of returning a one-sided or averaged slope:

* ties inside any active min/max selector (aligned or exactly touching edges,
  coinciding hull corners, equal widths/heights in the SCYLLA shape cost),
* the square-root kink of the Wasserstein distance at identical boxes,
* coincident centers or an exactly diagonal center offset in the SCYLLA
  angle cost.

Two conventions are deliberate and documented: the CIoU aspect weight
``alpha`` is held constant at its evaluation-point value (the standard
training-time treatment), and the gradient of a strictly empty intersection
is identically zero (the area is locally constant there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Box
from .metrics import CombinedParams, MetricKind, NwdParams

__all__ = ["Grad8", "NonDifferentiableError", "grad", "value_and_grad"]

_SQRT2_HALF = math.sqrt(2.0) / 2.0

# A dual is a (value, gradient-8-vector) pair.
_Dual = tuple[float, np.ndarray]


class NonDifferentiableError(ValueError):
    """The metric has no two-sided derivative at this box configuration."""


@dataclass(frozen=True)
class Grad8:
    """Partial derivatives with respect to the eight box coordinates."""

    dcx_p: float
    dcy_p: float
    dw_p: float
    dh_p: float
    dcx_g: float
    dcy_g: float
    dw_g: float
    dh_g: float

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Grad8":
        return cls(*(float(x) for x in arr))

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.dcx_p, self.dcy_p, self.dw_p, self.dh_p,
             self.dcx_g, self.dcy_g, self.dw_g, self.dh_g]
        )


def _basis(i: int) -> np.ndarray:
    e = np.zeros(8)
    e[i] = 1.0
    return e


def _const(v: float) -> _Dual:
    return v, np.zeros(8)


def _add(a: _Dual, b: _Dual) -> _Dual:
    return a[0] + b[0], a[1] + b[1]


def _sub(a: _Dual, b: _Dual) -> _Dual:
    return a[0] - b[0], a[1] - b[1]


def _mul(a: _Dual, b: _Dual) -> _Dual:
    return a[0] * b[0], a[0] * b[1] + b[0] * a[1]


def _div(a: _Dual, b: _Dual) -> _Dual:
    return a[0] / b[0], (a[1] * b[0] - a[0] * b[1]) / (b[0] * b[0])


def _scale(a: _Dual, k: float) -> _Dual:
    return k * a[0], k * a[1]


def _square(a: _Dual) -> _Dual:
    return a[0] * a[0], 2.0 * a[0] * a[1]


def _sqrt(a: _Dual, what: str) -> _Dual:
    if a[0] == 0.0:
        raise NonDifferentiableError(f"sqrt kink: {what} is exactly zero")
    r = math.sqrt(a[0])
    return r, a[1] / (2.0 * r)


def _exp(a: _Dual) -> _Dual:
    e = math.exp(a[0])
    return e, e * a[1]


def _atan(a: _Dual) -> _Dual:
    return math.atan(a[0]), a[1] / (1.0 + a[0] * a[0])


def _asin(a: _Dual) -> _Dual:
    return math.asin(a[0]), a[1] / math.sqrt(1.0 - a[0] * a[0])


def _cos(a: _Dual) -> _Dual:
    return math.cos(a[0]), -math.sin(a[0]) * a[1]


def _abs(a: _Dual, what: str) -> _Dual:
    if a[0] == 0.0:
        raise NonDifferentiableError(f"abs kink: {what} is exactly zero")
    s = math.copysign(1.0, a[0])
    return abs(a[0]), s * a[1]


def _dmax(a: _Dual, b: _Dual, what: str) -> _Dual:
    if a[0] > b[0]:
        return a
    if b[0] > a[0]:
        return b
    raise NonDifferentiableError(f"max selector tie: {what}")


def _dmin(a: _Dual, b: _Dual, what: str) -> _Dual:
    if a[0] < b[0]:
        return a
    if b[0] < a[0]:
        return b
    raise NonDifferentiableError(f"min selector tie: {what}")


class _BoxDuals:
    """Coordinate, corner, and area duals for one (p, g) pair."""

    def __init__(self, p: Box, g: Box) -> None:
        self.cx_p: _Dual = (p.cx, _basis(0))
        self.cy_p: _Dual = (p.cy, _basis(1))
        self.w_p: _Dual = (p.w, _basis(2))
        self.h_p: _Dual = (p.h, _basis(3))
        self.cx_g: _Dual = (g.cx, _basis(4))
        self.cy_g: _Dual = (g.cy, _basis(5))
        self.w_g: _Dual = (g.w, _basis(6))
        self.h_g: _Dual = (g.h, _basis(7))

        self.x1_p = _sub(self.cx_p, _scale(self.w_p, 0.5))
        self.x2_p = _add(self.cx_p, _scale(self.w_p, 0.5))
        self.y1_p = _sub(self.cy_p, _scale(self.h_p, 0.5))
        self.y2_p = _add(self.cy_p, _scale(self.h_p, 0.5))
        self.x1_g = _sub(self.cx_g, _scale(self.w_g, 0.5))
        self.x2_g = _add(self.cx_g, _scale(self.w_g, 0.5))
        self.y1_g = _sub(self.cy_g, _scale(self.h_g, 0.5))
        self.y2_g = _add(self.cy_g, _scale(self.h_g, 0.5))

        self.area_p = _mul(self.w_p, self.h_p)
        self.area_g = _mul(self.w_g, self.h_g)

    def intersection(self) -> _Dual:
        iw_v = min(self.x2_p[0], self.x2_g[0]) - max(self.x1_p[0], self.x1_g[0])
        ih_v = min(self.y2_p[0], self.y2_g[0]) - max(self.y1_p[0], self.y1_g[0])
        if iw_v < 0.0 or ih_v < 0.0:
            # Strictly disjoint: the area is locally the constant zero.
            return _const(0.0)
        if iw_v == 0.0 or ih_v == 0.0:
            raise NonDifferentiableError("boxes touch exactly: intersection kink")
        iw = _sub(_dmin(self.x2_p, self.x2_g, "intersection right edge"),
                  _dmax(self.x1_p, self.x1_g, "intersection left edge"))
        ih = _sub(_dmin(self.y2_p, self.y2_g, "intersection bottom edge"),
                  _dmax(self.y1_p, self.y1_g, "intersection top edge"))
        return _mul(iw, ih)

    def union(self, inter: _Dual) -> _Dual:
        return _sub(_add(self.area_p, self.area_g), inter)

    def iou(self) -> _Dual:
        inter = self.intersection()
        return _div(inter, self.union(inter))

    def hull_extents(self) -> tuple[_Dual, _Dual]:
        cw = _sub(_dmax(self.x2_p, self.x2_g, "hull right edge"),
                  _dmin(self.x1_p, self.x1_g, "hull left edge"))
        ch = _sub(_dmax(self.y2_p, self.y2_g, "hull bottom edge"),
                  _dmin(self.y1_p, self.y1_g, "hull top edge"))
        return cw, ch

    def center_dist_sq(self) -> _Dual:
        return _add(_square(_sub(self.cx_p, self.cx_g)),
                    _square(_sub(self.cy_p, self.cy_g)))


def _iou_dual(d: _BoxDuals) -> _Dual:
    return d.iou()


def _giou_dual(d: _BoxDuals) -> _Dual:
    inter = d.intersection()
    union = d.union(inter)
    cw, ch = d.hull_extents()
    hull = _mul(cw, ch)
    return _sub(_div(inter, union), _div(_sub(hull, union), hull))


def _diou_dual(d: _BoxDuals) -> _Dual:
    cw, ch = d.hull_extents()
    c2 = _add(_square(cw), _square(ch))
    return _sub(d.iou(), _div(d.center_dist_sq(), c2))


def _aspect_dual(d: _BoxDuals) -> _Dual:
    t = _sub(_atan(_div(d.w_g, d.h_g)), _atan(_div(d.w_p, d.h_p)))
    return _scale(_square(t), 4.0 / math.pi**2)


def _ciou_dual(d: _BoxDuals) -> _Dual:
    base = _diou_dual(d)
    v = _aspect_dual(d)
    if v[0] == 0.0:
        # The penalty and its gradient both vanish (v is a square at its root).
        return base
    alpha = v[0] / ((1.0 - d.iou()[0]) + v[0])  # frozen at the evaluation point
    return _sub(base, _scale(v, alpha))


def _eiou_dual(d: _BoxDuals) -> _Dual:
    cw, ch = d.hull_extents()
    c2 = _add(_square(cw), _square(ch))
    out = _sub(d.iou(), _div(d.center_dist_sq(), c2))
    out = _sub(out, _div(_square(_sub(d.w_p, d.w_g)), _square(cw)))
    return _sub(out, _div(_square(_sub(d.h_p, d.h_g)), _square(ch)))


def _siou_dual(d: _BoxDuals) -> _Dual:
    cw, ch = d.hull_extents()
    s_cw = _sub(d.cx_g, d.cx_p)
    s_ch = _sub(d.cy_g, d.cy_p)
    sigma_sq = _add(_square(s_cw), _square(s_ch))
    sigma = _sqrt(sigma_sq, "center distance")
    a_cw = _abs(s_cw, "horizontal center offset")
    a_ch = _abs(s_ch, "vertical center offset")
    if a_cw[0] == a_ch[0]:
        raise NonDifferentiableError("angle selector tie: |dx| == |dy|")
    sa1 = _div(a_cw, sigma)
    sin_alpha = _div(a_ch, sigma) if sa1[0] > _SQRT2_HALF else sa1
    angle = _cos(_sub(_scale(_asin(sin_alpha), 2.0), _const(math.pi / 2.0)))
    gamma = _sub(angle, _const(2.0))
    rho_x = _square(_div(s_cw, cw))
    rho_y = _square(_div(s_ch, ch))
    dist = _sub(_sub(_const(2.0), _exp(_mul(gamma, rho_x))), _exp(_mul(gamma, rho_y)))

    dw = _abs(_sub(d.w_p, d.w_g), "width difference")
    dh = _abs(_sub(d.h_p, d.h_g), "height difference")
    omega_w = _div(dw, _dmax(d.w_p, d.w_g, "larger width"))
    omega_h = _div(dh, _dmax(d.h_p, d.h_g, "larger height"))
    tw = _sub(_const(1.0), _exp(_scale(omega_w, -1.0)))
    th = _sub(_const(1.0), _exp(_scale(omega_h, -1.0)))
    shape = _add(_square(_square(tw)), _square(_square(th)))

    return _sub(d.iou(), _scale(_add(dist, shape), 0.5))


def _w2sq_dual(d: _BoxDuals) -> _Dual:
    out = d.center_dist_sq()
    out = _add(out, _square(_scale(_sub(d.w_p, d.w_g), 0.5)))
    return _add(out, _square(_scale(_sub(d.h_p, d.h_g), 0.5)))


def _nwd_dual(d: _BoxDuals, params: NwdParams) -> _Dual:
    w2 = _sqrt(_w2sq_dual(d), "Wasserstein distance between identical boxes")
    return _exp(_scale(w2, -1.0 / params.c))


def _combined_dual(d: _BoxDuals, params: CombinedParams) -> _Dual:
    ciou_term = _sub(_const(1.0), _ciou_dual(d))
    nwd_term = _sub(_const(1.0), _nwd_dual(d, params.nwd))
    return _add(ciou_term, _scale(nwd_term, params.beta))


def value_and_grad(kind: MetricKind, p: Box, g: Box,
                   params: NwdParams | CombinedParams | None = None
                   ) -> tuple[float, Grad8]:
    """Metric value and its exact gradient at ``(p, g)``.

    Raises :class:`NonDifferentiableError` at kink configurations.
    """
    d = _BoxDuals(p, g)
    if kind is MetricKind.IOU:
        out = _iou_dual(d)
    elif kind is MetricKind.GIOU:
        out = _giou_dual(d)
    elif kind is MetricKind.DIOU:
        out = _diou_dual(d)
    elif kind is MetricKind.CIOU:
        out = _ciou_dual(d)
    elif kind is MetricKind.EIOU:
        out = _eiou_dual(d)
    elif kind is MetricKind.SIOU:
        out = _siou_dual(d)
    elif kind is MetricKind.NWD:
        if params is None:
            params = NwdParams()
        if not isinstance(params, NwdParams):
            raise TypeError("nwd expects NwdParams")
        out = _nwd_dual(d, params)
    elif kind is MetricKind.COMBINED:
        if params is None:
            params = CombinedParams()
        if not isinstance(params, CombinedParams):
            raise TypeError("combined expects CombinedParams")
        out = _combined_dual(d, params)
    else:
        raise ValueError(f"unknown metric kind: {kind!r}")
    return out[0], Grad8.from_array(out[1])


def grad(kind: MetricKind, p: Box, g: Box,
         params: NwdParams | CombinedParams | None = None) -> Grad8:
    """Gradient of ``metric_value(kind, p, g, params)`` at ``(p, g)``."""
    return value_and_grad(kind, p, g, params)[1]
