"""Pure-numpy reference for the compiled ``_core`` extension.

Both modules expose the same two functions with identical semantics; the
package picks one at import time (see ``nll._backend``).
"""
import numpy as np

BUMP = 0
BUMP_SQ = 1
POWER = 2
BUBBLE = 3
CONST = 4


def _smooth_step(t):
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 0.0, 1.0, 0.0)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / (1.0 - tm))
    b = np.exp(-1.0 / tm)
    out[mid] = a / (a + b)
    return out


def _profile(code, p, r):
    if code == BUMP:
        return _smooth_step(r / p[0] - 1.0)
    if code == BUMP_SQ:
        return _smooth_step(r / p[0] - 1.0) ** 2
    if code == POWER:
        return p[0] * (1.0 + r) ** (-p[1])
    if code == BUBBLE:
        return p[0] * (1.0 + r * r) ** (-p[1])
    if code == CONST:
        return np.full_like(r, p[0], dtype=float)
    return np.zeros_like(r, dtype=float)


def radial_profile(code, params, r):
    return _profile(code, params, np.asarray(r, dtype=float))


def sym_diff_weighted(code, params, center, x, radii, dirs, kw):
    """Return sum_k kw[i, k] * (2u(x) - u(x + r_i d_k) - u(x - r_i d_k))."""
    y = np.asarray(x) - np.asarray(center)
    ux = 2.0 * _profile(code, params, np.array([np.sqrt(y @ y)]))[0]
    z = radii[:, None, None] * dirs[None, :, :]
    rp = np.sqrt(((y + z) ** 2).sum(axis=-1))
    rm = np.sqrt(((y - z) ** 2).sum(axis=-1))
    d = ux - _profile(code, params, rp) - _profile(code, params, rm)
    return (kw * d).sum(axis=1)
