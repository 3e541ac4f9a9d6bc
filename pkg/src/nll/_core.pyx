# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: radial profiles and fused symmetric second differences.

Mirrors ``_core_py`` exactly; the pure-Python module is the reference.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow, sqrt

cnp.import_array()

DEF BUMP = 0
DEF BUMP_SQ = 1
DEF POWER = 2
DEF BUBBLE = 3
DEF CONST = 4


cdef inline double _smooth_step(double t) noexcept nogil:
    # 1 at t <= 0, 0 at t >= 1, C-infinity in between
    cdef double a, b
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    a = exp(-1.0 / (1.0 - t))
    b = exp(-1.0 / t)
    return a / (a + b)


cdef inline double _profile(int code, const double* p, double r) noexcept nogil:
    cdef double v
    if code == BUMP:
        return _smooth_step(r / p[0] - 1.0)
    elif code == BUMP_SQ:
        v = _smooth_step(r / p[0] - 1.0)
        return v * v
    elif code == POWER:
        return p[0] * pow(1.0 + r, -p[1])
    elif code == BUBBLE:
        return p[0] * pow(1.0 + r * r, -p[1])
    elif code == CONST:
        return p[0]
    return 0.0


def radial_profile(int code, double[::1] params, double[::1] r):
    cdef Py_ssize_t i, m = r.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef const double* p = &params[0]
    with nogil:
        for i in range(m):
            o[i] = _profile(code, p, r[i])
    return out


def sym_diff_weighted(int code, double[::1] params, double[::1] center,
                      double[::1] x, double[::1] radii, double[:, ::1] dirs,
                      double[:, ::1] kw):
    """Return sum_k kw[i, k] * (2u(x) - u(x + r_i d_k) - u(x - r_i d_k))."""
    cdef Py_ssize_t nr = radii.shape[0], nd = dirs.shape[0], n = x.shape[0]
    cdef Py_ssize_t i, k, j
    cdef double r, acc, sp, sm, t, ux, y
    cdef const double* p = &params[0]
    out = np.empty(nr, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        sp = 0.0
        for j in range(n):
            y = x[j] - center[j]
            sp += y * y
        ux = 2.0 * _profile(code, p, sqrt(sp))
        for i in range(nr):
            r = radii[i]
            acc = 0.0
            for k in range(nd):
                sp = 0.0
                sm = 0.0
                for j in range(n):
                    y = x[j] - center[j]
                    t = r * dirs[k, j]
                    sp += (y + t) * (y + t)
                    sm += (y - t) * (y - t)
                acc += kw[i, k] * (ux - _profile(code, p, sqrt(sp))
                                   - _profile(code, p, sqrt(sm)))
            o[i] = acc
    return out
