"""Even, uniformly elliptic jump kernels K(z) sandwiched by lam/Lam |z|^{-n-2s}."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
from typing import Callable, Optional

import numpy as np

from .errors import KernelValidationError, ParameterDomainError
from .geometry import sample_directions

VALIDATION_TOL = 1e-12


@dataclass(frozen=True)
class KernelParams:
    n: int
    s: float
    lam: float = 1.0
    Lam: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError(f"dimension n must be a positive integer, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ParameterDomainError(f"order s must lie in (0, 1), got {self.s}")
        if not (0.0 < self.lam <= self.Lam < math.inf):
            raise ParameterDomainError(
                f"need 0 < lam <= Lam < inf, got lam={self.lam}, Lam={self.Lam}"
            )

    @property
    def exponent(self):
        """The homogeneity n + 2s of the comparison kernel."""
        return self.n + 2.0 * self.s


def fractional_constant(n, s):
    """c_{n,s} with symbol |xi|^{2s}: s 4^s Gamma(n/2 + s) / (pi^{n/2} Gamma(1 - s))."""
    return s * 4.0**s * math.gamma(n / 2 + s) / (math.pi ** (n / 2) * math.gamma(1.0 - s))


@dataclass(frozen=True, eq=False)
class Kernel:
    """A kernel callable on arrays of shape (..., n) with declared bounds.

    ``profile`` is set for homogeneous kernels K(z) = a(z/|z|) |z|^{-n-2s};
    quadrature then evaluates the angular factor once per direction set.
    """

    params: KernelParams
    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.params.n == 1 and z.ndim == 0:
            z = z[None]
        return self.evaluate(z)

    def on_grid(self, radii, dirs):
        """K(r_i d_k) as an (len(radii), len(dirs)) array."""
        radii = np.asarray(radii, dtype=float)
        if self.profile is not None:
            a = np.asarray(self.profile(dirs), dtype=float)
            return radii[:, None] ** (-self.params.exponent) * a[None, :]
        return self.evaluate(radii[:, None, None] * dirs[None, :, :])

    def tail_mass(self, radius, dirs, weights):
        """sum_k w_k int_radius^inf K(r d_k) r^{n-1} dr for the given directions."""
        p = self.params
        if self.profile is not None:
            a = np.asarray(self.profile(dirs), dtype=float)
            return float(weights @ a) * radius ** (-2.0 * p.s) / (2.0 * p.s)
        # t = (radius/r)^{2s} maps (radius, inf) to (0, 1); the integrand is
        # constant for homogeneous kernels and bounded by Lam/(2s) otherwise.
        t, wt = np.polynomial.legendre.leggauss(24)
        t = 0.5 * (t + 1.0)
        wt = 0.5 * wt
        r = radius * t ** (-1.0 / (2.0 * p.s))
        vals = self.on_grid(r, dirs) * (r ** p.exponent)[:, None]
        per_dir = (wt[:, None] * vals).sum(axis=0) * radius ** (-2.0 * p.s) / (2.0 * p.s)
        return float(per_dir @ weights)

    def with_bounds(self, lam=None, Lam=None):
        """Same kernel function, different declared ellipticity bounds."""
        p = self.params
        new = KernelParams(p.n, p.s, p.lam if lam is None else lam, p.Lam if Lam is None else Lam)
        return replace(self, params=new)


def _norm(z):
    return np.sqrt((np.asarray(z, dtype=float) ** 2).sum(axis=-1))


def make_fractional_kernel(params):
    """c_{n,s} |z|^{-n-2s}, declared with lam = Lam = c_{n,s}.

    The lam/Lam in ``params`` are ignored; only n and s are read.
    """
    c = fractional_constant(params.n, params.s)
    p = KernelParams(params.n, params.s, c, c)
    e = p.exponent

    def evaluate(z):
        return c * _norm(z) ** (-e)

    def profile(dirs):
        return np.full(len(dirs), c)

    return Kernel(p, evaluate, f"fractional(n={p.n}, s={p.s})", profile)


def fractional_kernel(n, s):
    return make_fractional_kernel(KernelParams(n, s))


def _check_profile(params, profile, count=360):
    dirs = sample_directions(params.n, 2 if params.n == 1 else count)
    a = np.asarray(profile(dirs), dtype=float)
    b = np.asarray(profile(-dirs), dtype=float)
    scale = max(np.max(np.abs(a)), 1.0)
    odd = np.abs(a - b) / scale
    i = int(np.argmax(odd))
    if odd[i] > VALIDATION_TOL:
        raise KernelValidationError(
            f"profile is not even: a(d) - a(-d) = {a[i] - b[i]:.3g} at d = {dirs[i].tolist()}",
            direction=dirs[i],
        )
    lo = params.lam * (1.0 - VALIDATION_TOL)
    hi = params.Lam * (1.0 + VALIDATION_TOL)
    bad = np.flatnonzero((a < lo) | (a > hi))
    if bad.size:
        i = int(bad[np.argmax(np.maximum(lo - a[bad], a[bad] - hi))])
        raise KernelValidationError(
            f"profile value {a[i]:.6g} outside [{params.lam}, {params.Lam}] at d = {dirs[i].tolist()}",
            direction=dirs[i],
        )


def make_anisotropic_kernel(params, direction_profile, label=None):
    """K(z) = a(z/|z|) |z|^{-n-2s}; a must be even with lam <= a <= Lam.

    ``direction_profile`` maps an (m, n) array of unit vectors to m values.
    """
    _check_profile(params, direction_profile)
    e = params.exponent

    def evaluate(z):
        z = np.asarray(z, dtype=float)
        r = _norm(z)
        shape = r.shape
        d = (z / r[..., None]).reshape(-1, params.n)
        return np.asarray(direction_profile(d), dtype=float).reshape(shape) * r ** (-e)

    return Kernel(params, evaluate, label or f"anisotropic(n={params.n}, s={params.s})",
                  direction_profile)


def table_profile(angles, values):
    """Periodic piecewise-linear a(theta) from an (angle, value) table; n <= 2."""
    angles = np.asarray(angles, dtype=float) % (2.0 * np.pi)
    values = np.asarray(values, dtype=float)
    order = np.argsort(angles)
    angles, values = angles[order], values[order]

    def profile(dirs):
        dirs = np.asarray(dirs, dtype=float)
        if dirs.shape[-1] == 1:
            theta = np.where(dirs[..., 0] >= 0.0, 0.0, np.pi)
        elif dirs.shape[-1] == 2:
            theta = np.arctan2(dirs[..., 1], dirs[..., 0]) % (2.0 * np.pi)
        else:
            raise ParameterDomainError("tabulated profiles support n = 1 or 2 only")
        return np.interp(theta, angles, values, period=2.0 * np.pi)

    return profile


@dataclass
class KernelReport:
    label: str
    samples: int
    evenness: float
    lower: float
    upper: float
    worst_lower_direction: Optional[list] = None
    worst_upper_direction: Optional[list] = None

    @property
    def passed(self):
        return max(self.evenness, self.lower, self.upper) <= VALIDATION_TOL


def validate_kernel(k, sample_count=1000):
    """Sample evenness and both sandwich sides on a log-radial x angular grid.

    Violations are relative: evenness against the mean of K(z) and K(-z), the
    sandwich sides against lam|z|^{-n-2s} and Lam|z|^{-n-2s}.
    """
    p = k.params
    nd = 1 if p.n == 1 else max(4, int(round(math.sqrt(sample_count))))
    nr = max(1, math.ceil(sample_count / nd))
    dirs = sample_directions(p.n, nd)
    radii = np.geomspace(1e-3, 1e3, nr)
    z = radii[:, None, None] * dirs[None, :, :]
    kp = np.asarray(k.evaluate(z), dtype=float)
    km = np.asarray(k.evaluate(-z), dtype=float)
    power = radii[:, None] ** (-p.exponent)
    mean = 0.5 * (np.abs(kp) + np.abs(km))
    even = float(np.max(np.abs(kp - km) / np.where(mean > 0, mean, 1.0)))
    ratio = np.concatenate([kp / power, km / power], axis=1)
    all_dirs = np.vstack([dirs, -dirs])
    low = np.maximum(0.0, (p.lam - ratio) / p.lam)
    high = np.maximum(0.0, (ratio - p.Lam) / p.Lam)
    il = np.unravel_index(np.argmax(low), low.shape)
    ih = np.unravel_index(np.argmax(high), high.shape)
    return KernelReport(
        label=k.label,
        samples=nr * nd,
        evenness=even,
        lower=float(low[il]),
        upper=float(high[ih]),
        worst_lower_direction=all_dirs[il[1]].tolist() if low[il] > 0 else None,
        worst_upper_direction=all_dirs[ih[1]].tolist() if high[ih] > 0 else None,
    )
