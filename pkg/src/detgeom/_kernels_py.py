"""Numpy pairwise-metric kernels: the pure-Python backend.

Same contract as the compiled extension in ``_kernels.pyx``: boxes arrive as
C-contiguous ``(n, 4)`` float64 arrays in center-size order and the result is
the dense ``(n, m)`` metric matrix.  Kind codes are defined in
:mod:`detgeom.kernels`.
"""

from __future__ import annotations

import numpy as np

_KIND_IOU = 0
_KIND_GIOU = 1
_KIND_DIOU = 2
_KIND_CIOU = 3
_KIND_EIOU = 4
_KIND_SIOU = 5
_KIND_NWD = 6
_KIND_COMBINED = 7

_SQRT2_HALF = np.sqrt(2.0) / 2.0


def _broadcast_corners(a: np.ndarray, b: np.ndarray):
    acx, acy, aw, ah = (a[:, i][:, None] for i in range(4))
    bcx, bcy, bw, bh = (b[:, i][None, :] for i in range(4))
    return (acx, acy, aw, ah), (bcx, bcy, bw, bh)


def _iou_terms(pa, pb):
    acx, acy, aw, ah = pa
    bcx, bcy, bw, bh = pb
    ax1, ax2 = acx - aw / 2, acx + aw / 2
    ay1, ay2 = acy - ah / 2, acy + ah / 2
    bx1, bx2 = bcx - bw / 2, bcx + bw / 2
    by1, by2 = bcy - bh / 2, bcy + bh / 2
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    cw = np.maximum(ax2, bx2) - np.minimum(ax1, bx1)
    ch = np.maximum(ay2, by2) - np.minimum(ay1, by1)
    return inter, union, cw, ch


def _ciou(pa, pb):
    acx, acy, aw, ah = pa
    bcx, bcy, bw, bh = pb
    inter, union, cw, ch = _iou_terms(pa, pb)
    iou = inter / union
    rho2 = (acx - bcx) ** 2 + (acy - bcy) ** 2
    c2 = cw * cw + ch * ch
    v = (4.0 / np.pi**2) * (np.arctan(bw / bh) - np.arctan(aw / ah)) ** 2
    denom = (1.0 - iou) + v
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(v > 0.0, v / denom, 0.0)
    return iou - rho2 / c2 - alpha * v


def _nwd(pa, pb, c: float):
    acx, acy, aw, ah = pa
    bcx, bcy, bw, bh = pb
    w2sq = (
        (acx - bcx) ** 2
        + (acy - bcy) ** 2
        + ((aw - bw) / 2.0) ** 2
        + ((ah - bh) / 2.0) ** 2
    )
    return np.exp(-np.sqrt(w2sq) / c)


def pairwise(kind: int, a: np.ndarray, b: np.ndarray, c: float, beta: float) -> np.ndarray:
    pa, pb = _broadcast_corners(a, b)
    acx, acy, aw, ah = pa
    bcx, bcy, bw, bh = pb

    if kind == _KIND_NWD:
        return _nwd(pa, pb, c)
    if kind == _KIND_CIOU:
        return _ciou(pa, pb)
    if kind == _KIND_COMBINED:
        return (1.0 - _ciou(pa, pb)) + beta * (1.0 - _nwd(pa, pb, c))

    inter, union, cw, ch = _iou_terms(pa, pb)
    iou = inter / union
    if kind == _KIND_IOU:
        return iou
    if kind == _KIND_GIOU:
        hull = cw * ch
        return iou - (hull - union) / hull
    rho2 = (acx - bcx) ** 2 + (acy - bcy) ** 2
    if kind == _KIND_DIOU:
        return iou - rho2 / (cw * cw + ch * ch)
    if kind == _KIND_EIOU:
        return (
            iou
            - rho2 / (cw * cw + ch * ch)
            - (aw - bw) ** 2 / (cw * cw)
            - (ah - bh) ** 2 / (ch * ch)
        )
    if kind == _KIND_SIOU:
        s_cw = bcx - acx
        s_ch = bcy - acy
        sigma = np.hypot(s_cw, s_ch)
        with np.errstate(divide="ignore", invalid="ignore"):
            sa1 = np.abs(s_cw) / sigma
            sa2 = np.abs(s_ch) / sigma
        sin_alpha = np.where(sa1 > _SQRT2_HALF, sa2, sa1)
        sin_alpha = np.where(sigma > 0.0, sin_alpha, 0.0)
        angle = np.cos(2.0 * np.arcsin(sin_alpha) - np.pi / 2.0)
        gamma = angle - 2.0
        rho_x = (s_cw / cw) ** 2
        rho_y = (s_ch / ch) ** 2
        dist = 2.0 - np.exp(gamma * rho_x) - np.exp(gamma * rho_y)
        dist = np.where(sigma > 0.0, dist, 0.0)
        omega_w = np.abs(aw - bw) / np.maximum(aw, bw)
        omega_h = np.abs(ah - bh) / np.maximum(ah, bh)
        shape = (1.0 - np.exp(-omega_w)) ** 4 + (1.0 - np.exp(-omega_h)) ** 4
        return iou - 0.5 * (dist + shape)
    raise ValueError(f"unknown kind code: {kind}")
