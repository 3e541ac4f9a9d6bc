"""Supersolution profiles c(1 + |x|)^{-2s/(q-1)} above the Serrin exponent."""
from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import (AccuracyNotReached, CalibrationImpossible, NLLError, ParameterDomainError,
                     PreconditionError, RegimeError)
from .fields import power_decay_field
from .iteration import SUPERCRITICAL, RegimeInput, classify
from .kernels import fractional_constant
from .operator import CutoffFamily, _map, make_bump, weak_supersolution_residual
from .quadrature import QuadratureConfig, pv_integrate

# alpha = 2s/(q-1) can be small, so the far field decays slowly; a large
# outer radius keeps the declared-decay tail bound below the tolerance
SHARPNESS_CONFIG = QuadratureConfig(R_out=1e9)


def default_radii():
    """{0} and 24 log-spaced radii in [0.1, 100]."""
    return [0.0] + np.geomspace(0.1, 100.0, 24).tolist()


@dataclass(frozen=True)
class SharpnessProfile:
    n: int
    s: float
    q: float
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ParameterDomainError("c must be positive")
        if classify(RegimeInput(self.n, self.s, self.q), max_steps=1).regime != SUPERCRITICAL:
            raise RegimeError(f"profile needs q > n/(n-2s); got n={self.n}, s={self.s}, q={self.q}")

    @property
    def alpha(self):
        return 2.0 * self.s / (self.q - 1.0)

    @property
    def field(self):
        return power_decay_field(self.n, self.alpha, self.c)

    def with_c(self, c):
        return SharpnessProfile(self.n, self.s, self.q, c)


def is_fractional(k, samples=16):
    """True if k agrees with c_{n,s} |z|^{-n-2s} to 1e-12 on a fixed sample."""
    n, s = k.params.n, k.params.s
    rng = np.random.default_rng(0)
    z = rng.normal(size=(samples, n)) * np.geomspace(1e-2, 1e2, samples)[:, None]
    ref = fractional_constant(n, s) * np.linalg.norm(z, axis=1) ** (-n - 2.0 * s)
    return bool(np.all(np.abs(np.asarray(k(z)) - ref) <= 1e-12 * ref))


def _check_kernel(profile, k, exploratory):
    if (k.params.n, k.params.s) != (profile.n, profile.s):
        raise PreconditionError("kernel and profile disagree on (n, s)")
    if not is_fractional(k) and not exploratory:
        raise PreconditionError("sharpness is stated for the fractional kernel; pass exploratory=True")


@dataclass
class MarginRow:
    r: float
    Lu: float
    uq: float
    margin: float
    budget: float
    flags: list = field(default_factory=list)

    @property
    def certified(self):
        return self.margin >= -self.budget


def _point(n, r):
    x = np.zeros(n)
    x[0] = r
    return x


def pointwise_margin(profile, k, radii=None, cfg=SHARPNESS_CONFIG, jobs=1, exploratory=False):
    """L_K u(x_r) - u(x_r)^q at x_r = r e_1; failed radii are skipped with a warning."""
    _check_kernel(profile, k, exploratory)
    radii = default_radii() if radii is None else [float(r) for r in radii]
    if any(r < 0 for r in radii):
        raise PreconditionError("radii must be nonnegative")
    u = profile.field
    tag = ["exploratory"] if exploratory and not is_fractional(k) else []

    def one(r):
        x = _point(profile.n, r)
        try:
            res = pv_integrate(u, k, x, cfg)
        except (AccuracyNotReached, ArithmeticError) as e:
            warnings.warn(f"radius {r}: {e}")
            return None
        uq = float(u(x)) ** profile.q
        return MarginRow(r, res.value, uq, res.value - uq, res.error, res.flags + tag)

    return [row for row in _map(one, radii, jobs) if row is not None]


@dataclass
class BaseValues:
    """L_K u0 and u0^q at the sample radii, u0 the c = 1 profile."""

    radii: list
    L: list
    uq: list
    errors: list


def base_values(template, k, radii=None, cfg=SHARPNESS_CONFIG, jobs=1, exploratory=False):
    rows = pointwise_margin(template.with_c(1.0), k, radii, cfg, jobs, exploratory)
    return BaseValues([r.r for r in rows], [r.Lu for r in rows], [r.uq for r in rows],
                      [r.budget for r in rows])


def calibrate_from(base, q, safety):
    if not 0 < safety < 1:
        raise ParameterDomainError("safety must lie in (0, 1)")
    for r, L in zip(base.radii, base.L):
        if not L > 0:
            raise CalibrationImpossible(
                f"operator value of the base profile is {L:.3g} at r={r}", r)
    ratio = min(L / uq for L, uq in zip(base.L, base.uq))
    return safety * ratio ** (1.0 / (q - 1.0))


def calibrate_c(template, k, radii=None, safety=0.9, cfg=SHARPNESS_CONFIG, jobs=1,
                exploratory=False):
    """safety * min_r (L_K u0(x_r) / u0(x_r)^q)^{1/(q-1)}."""
    base = base_values(template, k, radii, cfg, jobs, exploratory)
    return calibrate_from(base, template.q, safety)


@dataclass
class SharpnessReport:
    profile: SharpnessProfile
    safety: float
    base: BaseValues
    rows: list
    certified: bool
    scaling_gap: float
    weak: list = field(default_factory=list)
    exploratory: bool = False


def scaling_gap(base, rows, c, q):
    """max relative gap between the computed margin and c M1 - c^q M2."""
    gap = 0.0
    for L, uq, row in zip(base.L, base.uq, rows):
        pred = c * L - c**q * uq
        gap = max(gap, abs(row.margin - pred) / max(abs(row.Lu), abs(c * L), 1e-300))
    return gap


def sharpness_report(n, s, q, k, radii=None, safety=0.9, cfg=SHARPNESS_CONFIG, jobs=1,
                     exploratory=False, weak_scales=()):
    """Calibrate c, recompute margins at that c, and check the scaling identity."""
    template = SharpnessProfile(n, s, q)
    base = base_values(template, k, radii, cfg, jobs, exploratory)
    c = calibrate_from(base, q, safety)
    prof = template.with_c(c)
    rows = pointwise_margin(prof, k, base.radii, cfg, jobs, exploratory)
    weak = []
    family = CutoffFamily(make_bump(n))
    for R in weak_scales:
        try:
            weak.append((R, weak_supersolution_residual(k, prof.field, q, family.at(R), cfg, jobs)))
        except NLLError as e:
            weak.append((R, e))
    return SharpnessReport(
        profile=prof, safety=safety, base=base, rows=rows,
        certified=all(r.certified for r in rows) and len(rows) == len(base.radii),
        scaling_gap=scaling_gap(base, rows, c, q), weak=weak,
        exploratory=exploratory and not is_fractional(k),
    )
