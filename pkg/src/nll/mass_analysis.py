"""Local masses S(R) = int_{B_R} u^q, the tail functional, and the dyadic inequality."""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from .errors import KmaxTooSmallError, PreconditionError, TailSpaceError
from .geometry import full_sphere_rule, sphere_area
from .quadrature import adaptive_gk

MASS_TOL = 1e-10
DEFAULT_KMAX = 40
REMAINDER_FRACTION = 0.1


def _radial_average(u, power, angular):
    """r -> sum_k w_k |u(r d_k)|^power over the full sphere (one node if radial)."""
    n = u.n
    if u.radial is not None and not np.any(u.center_array):
        dirs, w = np.eye(n)[:1], np.array([sphere_area(n)])
    else:
        dirs, w = full_sphere_rule(n, angular)

    def avg(r):
        r = np.asarray(r, dtype=float)
        vals = np.asarray(u.evaluate(r[:, None, None] * dirs[None, :, :]), dtype=float)
        if np.any(vals < 0.0):
            raise PreconditionError("field takes negative values on the sample nodes")
        return (vals**power) @ w

    return avg


def ball_integral(u, R, power=1.0, resolution=8, angular=64, weight=None):
    """int_{B_R} u^power (times weight(|x|) if given) by adaptive radial quadrature.

    [0, min(R, 1)] is integrated in r, [1, R] in log r.
    """
    if R <= 0:
        raise PreconditionError("radius must be positive")
    n = u.n
    avg = _radial_average(u, power, angular)
    wfun = (lambda r: 1.0) if weight is None else weight
    feats = sorted(f for f in (u.radial.features if u.radial is not None else ()) if f > 0)

    def lin(r):
        return avg(r) * r ** (n - 1) * wfun(r)

    def logv(t):
        r = np.exp(t)
        return avg(r) * r**n * wfun(r)

    segs = []
    r1 = min(R, 1.0)
    bps = np.unique([0.0, r1] + [f for f in feats if f < r1] + list(np.linspace(0.0, r1, resolution + 1)))
    segs.append((lin, bps))
    if R > 1.0:
        t1 = math.log(R)
        tb = [0.0, t1] + [math.log(f) for f in feats if 1.0 < f < R]
        tb += list(np.linspace(0.0, t1, max(resolution, math.ceil(t1)) + 1))
        segs.append((logv, np.unique(tb)))
    val, _, _, _ = adaptive_gk(segs, tol=MASS_TOL, atol=1e-300)
    return float(val)


def mass(u, q, R, grid_resolution=8):
    """S(R) = int_{B_R} u^q dx."""
    if q <= 1:
        raise PreconditionError("q must exceed 1")
    return ball_integral(u, R, q, grid_resolution)


def tail_functional(u, k, R_out=1e3):
    """int u(x) (1 + |x|)^{-n-2s} dx: quadrature on B_{R_out} plus the decay tail.

    With |u| <= C_u (1 + |x|)^{-beta}, the integrand beyond R_out is at most
    C_u |S^{n-1}| (1 + r)^{-beta-2s-1}, which integrates to
    C_u |S^{n-1}| (1 + R_out)^{-beta-2s} / (beta + 2s).
    """
    n, s = k.n, k.s
    e = n + 2.0 * s
    inner = ball_integral(_Abs(u), R_out, 1.0, weight=lambda r: (1.0 + r) ** (-e))
    if u.support_radius is not None and np.linalg.norm(u.center_array) + u.support_radius <= R_out:
        return inner
    if u.decay is None:
        raise PreconditionError("field must declare its decay")
    beta, cu = u.decay
    if beta + 2.0 * s <= 0.0:
        raise TailSpaceError(
            f"decay exponent {beta} with s={s}: integrand ~ |x|^{-beta - n - 2*s:g}, not integrable"
        )
    return inner + cu * sphere_area(n) * (1.0 + R_out) ** (-beta - 2.0 * s) / (beta + 2.0 * s)


class _Abs:
    """|u| with the metadata of u."""

    def __init__(self, u):
        self.u = u
        self.n = u.n
        self.radial = u.radial
        self.center_array = u.center_array

    def evaluate(self, x):
        return np.abs(self.u.evaluate(x))


@dataclass
class MassProfile:
    q: float
    radii: list
    masses: list
    tail_value: Optional[float] = None

    def check(self):
        """Raise AssertionError if S is not nondecreasing or the tail value is not finite."""
        m = np.asarray(self.masses)
        if np.any(np.diff(m) < -1e-9 * np.maximum(1.0, np.abs(m[1:]))):
            raise AssertionError("masses decrease with R")
        if self.tail_value is not None and not math.isfinite(self.tail_value):
            raise AssertionError("tail value is not finite")


def mass_profile(u, q, radii, kparams=None, R_out=1e3):
    radii = sorted(float(r) for r in radii)
    masses = [mass(u, q, r) for r in radii]
    tail = tail_functional(u, kparams, R_out) if kparams is not None else None
    return MassProfile(q, radii, masses, tail)


@dataclass
class GrowthReport:
    radii: list
    normalized: list
    sup: float
    sup_radius: float
    attained_at_smallest: bool
    nonincreasing: bool


def verify_growth_bound(profile, n):
    """sup_R S(R)/R^n over the sampled radii (all >= 1)."""
    if any(r < 1 for r in profile.radii):
        raise PreconditionError("growth bound is checked for R >= 1 only")
    norm = [m / r**n for r, m in zip(profile.radii, profile.masses)]
    i = int(np.argmax(norm)) if norm else 0
    nonincreasing = all(b <= a * (1 + 1e-12) + 1e-300 for a, b in zip(norm, norm[1:]))
    return GrowthReport(
        radii=list(profile.radii),
        normalized=norm,
        sup=max(norm) if norm else 0.0,
        sup_radius=profile.radii[i] if norm else float("nan"),
        attained_at_smallest=(i == 0),
        nonincreasing=nonincreasing,
    )


def exponents(n, s, q):
    """(a, b) = (n - 2s - n/q, 2s + n/q)."""
    return n - 2.0 * s - n / q, 2.0 * s + n / q


@dataclass
class DyadicCheck:
    a: float
    b: float
    k_max: int
    radii: list
    ratios: list
    partial_sums: list
    remainders: list
    masses: list
    growth_sup: float
    status: str = "ok"
    constant: float = 0.0
    degenerate: list = field(default_factory=list)

    @property
    def spread(self):
        """max/min of the finite positive ratios."""
        r = [x for x in self.ratios if x is not None and x > 0]
        return max(r) / min(r) if r else 1.0


def verify_dyadic_inequality(u, q, k, radii, k_max=DEFAULT_KMAX, cache=None):
    """Per-R ratio S(R) / (R^a sum_{k<=k_max} 2^{-kb} S(2^{k+1}R)^{1/q}).

    The omitted terms are bounded with S(rho) <= G rho^n, G the sampled growth
    sup, giving G^{1/q} (2R)^{n/q} 2^{-2s(k_max+1)} / (1 - 2^{-2s}); a
    remainder above 10% of the partial sum raises KmaxTooSmallError.
    """
    n, s = k.n, k.s
    a, b = exponents(n, s, q)
    radii = [float(r) for r in radii]
    if any(r < 1 for r in radii):
        raise PreconditionError("radii must be >= 1")
    S = {} if cache is None else cache

    def get(r):
        if r not in S:
            S[r] = mass(u, q, r)
        return S[r]

    for R in radii:
        get(R)
        for j in range(k_max + 1):
            get(2.0 ** (j + 1) * R)
    keys = sorted(r for r in S if r >= 1)
    growth = max(S[r] / r**n for r in keys)
    ratios, partials, rems, degenerate = [], [], [], []
    for R in radii:
        partial = sum(2.0 ** (-j * b) * get(2.0 ** (j + 1) * R) ** (1.0 / q) for j in range(k_max + 1))
        rem = (growth ** (1.0 / q) * (2.0 * R) ** (n / q)
               * 2.0 ** (-2.0 * s * (k_max + 1)) / (1.0 - 2.0 ** (-2.0 * s)))
        if rem > REMAINDER_FRACTION * partial and rem > 0:
            raise KmaxTooSmallError(
                f"series remainder {rem:.3g} exceeds 10% of partial sum {partial:.3g} at R={R}",
                rem, partial,
            )
        partials.append(partial)
        rems.append(rem)
        if partial == 0.0:
            ratios.append(None)
            degenerate.append(R)
        else:
            ratios.append(get(R) / (R**a * partial))
    finite = [r for r in ratios if r is not None]
    status = "degenerate-zero" if not finite else "ok"
    return DyadicCheck(
        a=a, b=b, k_max=k_max, radii=radii, ratios=ratios, partial_sums=partials,
        remainders=rems, masses=[S[r] for r in radii], growth_sup=growth, status=status,
        constant=max(finite) if finite else 0.0, degenerate=degenerate,
    )
