"""Scalar fields on R^n with the metadata the quadrature needs.

A field is a vectorized callable on arrays of shape (..., n).  Radial fields
built here also carry a ``RadialProfile`` so the compiled core can evaluate
second differences without a Python round trip per node.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import DomainError, ParameterDomainError

SMOOTHNESS = ("smooth", "C2-local", "rough")


@dataclass(frozen=True)
class RadialProfile:
    """u(x) = amplitude * f(|x - center|) for a profile f known to the core."""

    code: int
    params: tuple
    center: tuple
    amplitude: float = 1.0
    # radii (from center) where f has a kink or a transition; used as breakpoints
    features: tuple = ()

    def __call__(self, r):
        r = np.ascontiguousarray(r, dtype=float)
        flat = r.ravel()
        vals = _backend.core.radial_profile(self.code, np.asarray(self.params, dtype=float), flat)
        return self.amplitude * np.asarray(vals).reshape(r.shape)


@dataclass(frozen=True, eq=False)
class ScalarField:
    evaluate: Callable[[np.ndarray], np.ndarray]
    n: int
    smoothness: str = "smooth"
    # (beta, C_u) with |u(x)| <= C_u (1 + |x|)^{-beta}; beta < 0 means growth
    decay: Optional[tuple] = None
    # u vanishes outside the ball of this radius about ``center``
    support_radius: Optional[float] = None
    center: Optional[tuple] = None
    radial: Optional[RadialProfile] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS:
            raise ParameterDomainError(f"smoothness must be one of {SMOOTHNESS}")
        if self.center is None:
            object.__setattr__(self, "center", (0.0,) * self.n)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and x.ndim == 0:
            x = x[None]
        if x.ndim == 1 and x.shape[0] == self.n:
            return float(np.asarray(self.evaluate(x[None, :]), dtype=float).reshape(-1)[0])
        return self.evaluate(x)

    @property
    def center_array(self):
        return np.asarray(self.center, dtype=float)

    def scaled(self, c):
        """The field c * u, with metadata carried over."""
        ev = self.evaluate
        decay = None if self.decay is None else (self.decay[0], abs(c) * self.decay[1])
        radial = None if self.radial is None else replace(self.radial, amplitude=c * self.radial.amplitude)
        return replace(self, evaluate=lambda x: c * ev(x), decay=decay, radial=radial,
                       label=f"{c:g}*{self.label}")

    def check_metadata(self, points):
        """Raise DomainError if sampled points contradict declared support or decay."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        vals = np.asarray(self.evaluate(pts), dtype=float)
        if self.support_radius is not None:
            d = np.linalg.norm(pts - self.center_array, axis=1)
            bad = (d > self.support_radius) & (vals != 0.0)
            if bad.any():
                raise DomainError(f"nonzero value outside declared support at {pts[bad][0].tolist()}")
        if self.decay is not None:
            beta, cu = self.decay
            bound = cu * (1.0 + np.linalg.norm(pts, axis=1)) ** (-beta)
            bad = np.abs(vals) > bound * (1.0 + 1e-12)
            if bad.any():
                raise DomainError(f"declared decay violated at {pts[bad][0].tolist()}")


def _norm(x):
    return np.sqrt((np.asarray(x, dtype=float) ** 2).sum(axis=-1))


def radial_field(n, profile, *, smoothness="smooth", decay=None, support_radius=None, label=""):
    center = np.asarray(profile.center, dtype=float)

    def evaluate(x):
        return profile(_norm(np.asarray(x, dtype=float) - center))

    return ScalarField(evaluate, n, smoothness, decay, support_radius, tuple(center), profile, label)


def _center(n, center):
    if center is None:
        return (0.0,) * n
    c = tuple(float(v) for v in np.atleast_1d(center))
    if len(c) != n:
        raise ParameterDomainError(f"center must have {n} coordinates")
    return c


def constant_field(n, value=1.0):
    prof = RadialProfile(_backend.CONST, (float(value),), (0.0,) * n)
    return radial_field(n, prof, decay=(0.0, abs(value)), label=f"const({value:g})")


def bump_field(n, scale=1.0, center=None, squared=False):
    """eta(|x - center| / scale): 1 on the inner ball, 0 beyond twice the scale."""
    code = _backend.BUMP_SQ if squared else _backend.BUMP
    c = _center(n, center)
    prof = RadialProfile(code, (float(scale),), c, features=(scale, 2.0 * scale))
    name = "eta^2" if squared else "eta"
    return radial_field(n, prof, support_radius=2.0 * scale,
                        label=f"{name}(|x-{list(c)}|/{scale:g})")


def power_decay_field(n, alpha, amplitude=1.0):
    """amplitude * (1 + |x|)^{-alpha}; Lipschitz kink at the origin."""
    prof = RadialProfile(_backend.POWER, (1.0, float(alpha)), (0.0,) * n, amplitude, features=(0.0,))
    return radial_field(n, prof, smoothness="C2-local", decay=(alpha, abs(amplitude)),
                        label=f"{amplitude:g}(1+|x|)^-{alpha:g}")


def bubble_field(n, power, amplitude=1.0):
    """amplitude * (1 + |x|^2)^{-power}."""
    prof = RadialProfile(_backend.BUBBLE, (1.0, float(power)), (0.0,) * n, amplitude)
    return radial_field(n, prof, decay=(2.0 * power, abs(amplitude) * 2.0**power),
                        label=f"{amplitude:g}(1+|x|^2)^-{power:g}")


def fractional_bubble(n, s):
    """(1 + |x|^2)^{-(n-2s)/2}, whose image under the fractional Laplacian is c u^{(n+2s)/(n-2s)}."""
    if n <= 2 * s:
        raise ParameterDomainError("the bubble needs n > 2s")
    return bubble_field(n, (n - 2 * s) / 2)


def cosine_field(xi):
    """cos(xi . x); bounded, so declared with decay exponent 0."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))

    def evaluate(x):
        return np.cos(np.asarray(x, dtype=float) @ xi)

    return ScalarField(evaluate, len(xi), "smooth", (0.0, 1.0), label=f"cos({xi.tolist()}.x)")


def affine_field(slope, offset=0.0):
    slope = np.atleast_1d(np.asarray(slope, dtype=float))

    def evaluate(x):
        return np.asarray(x, dtype=float) @ slope + offset

    bound = abs(offset) + float(np.abs(slope).sum())
    return ScalarField(evaluate, len(slope), "smooth", (-1.0, bound), label="affine")


def quadratic_field(n):
    """|x|^2."""
    return ScalarField(lambda x: (np.asarray(x, dtype=float) ** 2).sum(axis=-1), n, "smooth",
                       (-2.0, 1.0), label="|x|^2")


def zero_field(n):
    return constant_field(n, 0.0)
