# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pairwise-metric kernels.

Scalar math mirrors detgeom.metrics exactly (same operation order, same libm
calls) so the matrices agree with the reference to float rounding.  The
numpy twin lives in detgeom._kernels_py; detgeom.kernels picks one at import.
"""

from libc.math cimport asin, atan, cos, exp, fabs, sqrt, M_PI

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF KIND_IOU = 0
DEF KIND_GIOU = 1
DEF KIND_DIOU = 2
DEF KIND_CIOU = 3
DEF KIND_EIOU = 4
DEF KIND_SIOU = 5
DEF KIND_NWD = 6
DEF KIND_COMBINED = 7


cdef inline double _fmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double _fmax(double a, double b) nogil:
    return a if a > b else b


cdef inline double _iou(double pcx, double pcy, double pw, double ph,
                        double gcx, double gcy, double gw, double gh) nogil:
    cdef double iw = _fmin(pcx + pw / 2, gcx + gw / 2) - _fmax(pcx - pw / 2, gcx - gw / 2)
    cdef double ih = _fmin(pcy + ph / 2, gcy + gh / 2) - _fmax(pcy - ph / 2, gcy - gh / 2)
    cdef double inter = _fmax(iw, 0.0) * _fmax(ih, 0.0)
    return inter / (pw * ph + gw * gh - inter)


cdef inline double _giou(double pcx, double pcy, double pw, double ph,
                         double gcx, double gcy, double gw, double gh) nogil:
    cdef double iw = _fmin(pcx + pw / 2, gcx + gw / 2) - _fmax(pcx - pw / 2, gcx - gw / 2)
    cdef double ih = _fmin(pcy + ph / 2, gcy + gh / 2) - _fmax(pcy - ph / 2, gcy - gh / 2)
    cdef double inter = _fmax(iw, 0.0) * _fmax(ih, 0.0)
    cdef double union_ = pw * ph + gw * gh - inter
    cdef double cw = _fmax(pcx + pw / 2, gcx + gw / 2) - _fmin(pcx - pw / 2, gcx - gw / 2)
    cdef double ch = _fmax(pcy + ph / 2, gcy + gh / 2) - _fmin(pcy - ph / 2, gcy - gh / 2)
    cdef double hull = cw * ch
    return inter / union_ - (hull - union_) / hull


cdef inline double _diou(double pcx, double pcy, double pw, double ph,
                         double gcx, double gcy, double gw, double gh) nogil:
    cdef double cw = _fmax(pcx + pw / 2, gcx + gw / 2) - _fmin(pcx - pw / 2, gcx - gw / 2)
    cdef double ch = _fmax(pcy + ph / 2, gcy + gh / 2) - _fmin(pcy - ph / 2, gcy - gh / 2)
    cdef double rho2 = (pcx - gcx) * (pcx - gcx) + (pcy - gcy) * (pcy - gcy)
    return _iou(pcx, pcy, pw, ph, gcx, gcy, gw, gh) - rho2 / (cw * cw + ch * ch)


cdef inline double _ciou(double pcx, double pcy, double pw, double ph,
                         double gcx, double gcy, double gw, double gh) nogil:
    cdef double base = _diou(pcx, pcy, pw, ph, gcx, gcy, gw, gh)
    cdef double t = atan(gw / gh) - atan(pw / ph)
    cdef double v = (4.0 / (M_PI * M_PI)) * t * t
    cdef double alpha
    if v == 0.0:
        return base
    alpha = v / ((1.0 - _iou(pcx, pcy, pw, ph, gcx, gcy, gw, gh)) + v)
    return base - alpha * v


cdef inline double _eiou(double pcx, double pcy, double pw, double ph,
                         double gcx, double gcy, double gw, double gh) nogil:
    cdef double cw = _fmax(pcx + pw / 2, gcx + gw / 2) - _fmin(pcx - pw / 2, gcx - gw / 2)
    cdef double ch = _fmax(pcy + ph / 2, gcy + gh / 2) - _fmin(pcy - ph / 2, gcy - gh / 2)
    cdef double rho2 = (pcx - gcx) * (pcx - gcx) + (pcy - gcy) * (pcy - gcy)
    return (_iou(pcx, pcy, pw, ph, gcx, gcy, gw, gh)
            - rho2 / (cw * cw + ch * ch)
            - (pw - gw) * (pw - gw) / (cw * cw)
            - (ph - gh) * (ph - gh) / (ch * ch))


cdef inline double _siou(double pcx, double pcy, double pw, double ph,
                         double gcx, double gcy, double gw, double gh) nogil:
    cdef double cw = _fmax(pcx + pw / 2, gcx + gw / 2) - _fmin(pcx - pw / 2, gcx - gw / 2)
    cdef double ch = _fmax(pcy + ph / 2, gcy + gh / 2) - _fmin(pcy - ph / 2, gcy - gh / 2)
    cdef double s_cw = gcx - pcx
    cdef double s_ch = gcy - pcy
    cdef double sigma = sqrt(s_cw * s_cw + s_ch * s_ch)
    cdef double dist = 0.0
    cdef double sin_alpha, angle, gamma, rho_x, rho_y, omega_w, omega_h, shape
    if sigma > 0.0:
        sin_alpha = fabs(s_cw) / sigma
        if sin_alpha > 0.7071067811865476:
            sin_alpha = fabs(s_ch) / sigma
        angle = cos(2.0 * asin(sin_alpha) - M_PI / 2.0)
        gamma = angle - 2.0
        rho_x = (s_cw / cw) * (s_cw / cw)
        rho_y = (s_ch / ch) * (s_ch / ch)
        dist = 2.0 - exp(gamma * rho_x) - exp(gamma * rho_y)
    omega_w = fabs(pw - gw) / _fmax(pw, gw)
    omega_h = fabs(ph - gh) / _fmax(ph, gh)
    shape = ((1.0 - exp(-omega_w)) * (1.0 - exp(-omega_w))
             * (1.0 - exp(-omega_w)) * (1.0 - exp(-omega_w))
             + (1.0 - exp(-omega_h)) * (1.0 - exp(-omega_h))
             * (1.0 - exp(-omega_h)) * (1.0 - exp(-omega_h)))
    return _iou(pcx, pcy, pw, ph, gcx, gcy, gw, gh) - 0.5 * (dist + shape)


cdef inline double _nwd(double pcx, double pcy, double pw, double ph,
                        double gcx, double gcy, double gw, double gh,
                        double c) nogil:
    cdef double w2sq = ((pcx - gcx) * (pcx - gcx)
                        + (pcy - gcy) * (pcy - gcy)
                        + ((pw - gw) / 2.0) * ((pw - gw) / 2.0)
                        + ((ph - gh) / 2.0) * ((ph - gh) / 2.0))
    return exp(-sqrt(w2sq) / c)


def pairwise(int kind, double[:, ::1] a, double[:, ::1] b, double c, double beta):
    """Dense (n, m) metric matrix between box arrays ``a`` and ``b``."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double pcx, pcy, pw, ph

    if kind < KIND_IOU or kind > KIND_COMBINED:
        raise ValueError(f"unknown kind code: {kind}")

    with nogil:
        for i in range(n):
            pcx = a[i, 0]
            pcy = a[i, 1]
            pw = a[i, 2]
            ph = a[i, 3]
            for j in range(m):
                if kind == KIND_IOU:
                    o[i, j] = _iou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_GIOU:
                    o[i, j] = _giou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_DIOU:
                    o[i, j] = _diou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_CIOU:
                    o[i, j] = _ciou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_EIOU:
                    o[i, j] = _eiou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_SIOU:
                    o[i, j] = _siou(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3])
                elif kind == KIND_NWD:
                    o[i, j] = _nwd(pcx, pcy, pw, ph, b[j, 0], b[j, 1], b[j, 2], b[j, 3], c)
                else:
                    o[i, j] = ((1.0 - _ciou(pcx, pcy, pw, ph,
                                            b[j, 0], b[j, 1], b[j, 2], b[j, 3]))
                               + beta * (1.0 - _nwd(pcx, pcy, pw, ph,
                                                    b[j, 0], b[j, 1], b[j, 2], b[j, 3], c)))
    return out
