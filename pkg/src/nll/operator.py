"""Operator application, the cutoff family phi_R = eta(x/R)^2 and weak-form checks."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .errors import AccuracyNotReached, ParameterDomainError, PreconditionError, TailSpaceError
from .fields import ScalarField, bump_field
from .geometry import ball_volume, full_sphere_rule, sample_directions, sphere_area
from .quadrature import DEFAULT_CONFIG, pv_integrate

# sup sampling per region: radii x directions
SUP_RADII = 64
SUP_DIRECTIONS = {1: 1, 2: 32, 3: 96}
DYADIC_TERMS = 40


def make_bump(n):
    """Radial C-infinity bump: 1 on B_1, 0 off B_2, smooth-step transition between."""
    if n not in (1, 2, 3):
        raise ParameterDomainError(f"bump supports n in {{1, 2, 3}}, got {n}")
    return bump_field(n, 1.0)


@dataclass(frozen=True, eq=False)
class CutoffFamily:
    bump: ScalarField
    R: float = 1.0

    def at(self, R):
        return CutoffFamily(self.bump, R)

    @property
    def phi(self):
        """phi_R(x) = eta(x/R)^2 with support radius 2R."""
        b = self.bump
        rad = b.radial
        if rad is not None and rad.code == _backend.BUMP and rad.params == (1.0,):
            return bump_field(b.n, self.R, squared=True)
        R = float(self.R)
        ev = b.evaluate

        def evaluate(x):
            return ev(np.asarray(x, dtype=float) / R) ** 2

        return ScalarField(evaluate, b.n, b.smoothness, None, 2.0 * R, label=f"phi_{R:g}")


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def apply_operator(k, f, points, cfg=DEFAULT_CONFIG, jobs=1, method="auto"):
    """Per-point ``pv_integrate`` results, in input order."""
    pts = np.asarray(points, dtype=float).reshape(-1, k.params.n)
    return _map(lambda x: pv_integrate(f, k, x, cfg, method=method), list(pts), jobs)


def operator_values(k, f, points, cfg=DEFAULT_CONFIG, jobs=1):
    """Values and error estimates as arrays; exterior route for points off the support."""
    pts = np.asarray(points, dtype=float).reshape(-1, k.params.n)

    def one(x):
        method = "auto"
        if f.support_radius is not None and np.linalg.norm(x - f.center_array) > f.support_radius:
            method = "exterior"
        return pv_integrate(f, k, x, cfg, method=method)

    res = _map(one, list(pts), jobs)
    return np.array([r.value for r in res]), np.array([r.error for r in res])


@dataclass
class CutoffBoundReport:
    R: float
    inner_constant: float
    outer_constant: float
    inner_radii: list
    outer_radii: list
    directions: int
    inner_values: list = field(default_factory=list, repr=False)
    outer_values: list = field(default_factory=list, repr=False)
    failures: list = field(default_factory=list)
    label: str = "empirical sup"


def cutoff_sample_radii(R):
    inner = R * np.geomspace(2.0**-5, 2.0, SUP_RADII, endpoint=False)
    outer = R * np.geomspace(2.0, 64.0, SUP_RADII)
    return inner, outer


def verify_cutoff_bound(k, family, scales, cfg=DEFAULT_CONFIG, jobs=1):
    """Empirical constants of the two-branch cutoff estimate at each scale.

    inner: sup_{|x| < 2R} |L phi_R(x)| R^{2s}
    outer: sup_{2R <= |x| <= 64R} |L phi_R(x)| |x|^{n+2s} / R^n

    Only the kernel function is read, never its declared lower bound.
    """
    n, s = k.params.n, k.params.s
    dirs = sample_directions(n, SUP_DIRECTIONS.get(n, 1))
    reports = []
    for R in scales:
        if R < 1:
            raise PreconditionError("scales must be >= 1")
        phi = family.at(R).phi
        rin, rout = cutoff_sample_radii(R)
        failures = []

        def evaluate(points, exterior):
            def one(x):
                try:
                    m = "exterior" if exterior else "pv"
                    return pv_integrate(phi, k, x, cfg, method=m).value
                except (AccuracyNotReached, ArithmeticError) as e:
                    failures.append((list(x), str(e)))
                    return float("nan")
            return np.array(_map(one, list(points), jobs))

        pin = (rin[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        pout = (rout[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        vin = evaluate(pin, False)
        vout = evaluate(pout, True)
        rin_all = np.repeat(rin, len(dirs))
        rout_all = np.repeat(rout, len(dirs))
        inner_c = float(np.nanmax(np.abs(vin))) * R ** (2 * s)
        outer_c = float(np.nanmax(np.abs(vout) * rout_all ** (n + 2 * s))) / R**n
        reports.append(CutoffBoundReport(
            R=float(R), inner_constant=inner_c, outer_constant=outer_c,
            inner_radii=rin.tolist(), outer_radii=rout.tolist(), directions=len(dirs),
            inner_values=list(zip(rin_all.tolist(), vin.tolist())),
            outer_values=list(zip(rout_all.tolist(), vout.tolist())),
            failures=failures,
        ))
    return reports


def cutoff_uniformity(reports):
    """max/min of each constant across scales; the R-uniformity evidence."""
    inner = [r.inner_constant for r in reports]
    outer = [r.outer_constant for r in reports]
    return max(inner) / min(inner), max(outer) / min(outer)


# ---------------------------------------------------------------- node sets

def _segment_nodes(a, b, panels, order):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    x = (0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * xg[None, :]).ravel()
    w = (0.5 * (hi - lo)[:, None] * wg[None, :]).ravel()
    return x, w


def _radial_breaks(fields, radius):
    bps = {0.0, radius}
    for f in fields:
        if f.radial is not None:
            bps.update(r for r in f.radial.features if 0.0 < r < radius)
    return sorted(bps)


def ball_nodes(n, radius, fields=(), center=None, panels=4, order=16, angular=64):
    """Quadrature nodes and weights on B_radius(center).

    The radial rule breaks at feature radii of the given fields (those
    centered at the same point) so kinks and plateau edges sit on panel edges.
    """
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    local = [f for f in fields if f is not None and np.allclose(f.center_array, c)]
    bps = _radial_breaks(local, radius)
    if n == 1:
        xs, ws = [], []
        for a, b in zip(bps[:-1], bps[1:]):
            x, w = _segment_nodes(a, b, panels, order)
            xs += [x, -x]
            ws += [w, w]
        return c + np.concatenate(xs)[:, None], np.concatenate(ws)
    rs, wr = [], []
    for a, b in zip(bps[:-1], bps[1:]):
        x, w = _segment_nodes(a, b, panels, order)
        rs.append(x)
        wr.append(w)
    r, wr = np.concatenate(rs), np.concatenate(wr)
    dirs, wd = full_sphere_rule(n, angular)
    pts = c + (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    w = ((wr * r ** (n - 1))[:, None] * wd[None, :]).ravel()
    return pts, w


def annulus_nodes(n, r0, r1, order=16, angular=64):
    """Nodes on {r0 <= |x| < r1}, Gauss-Legendre in log r times the sphere rule."""
    t, wt = _segment_nodes(math.log(r0), math.log(r1), 1, order)
    r = np.exp(t)
    wr = wt * r
    if n == 1:
        return np.concatenate([r, -r])[:, None], np.concatenate([wr, wr])
    dirs, wd = full_sphere_rule(n, angular)
    pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    w = ((wr * r ** (n - 1))[:, None] * wd[None, :]).ravel()
    return pts, w


# ---------------------------------------------------------------- pairing

def pairing(k, f, g, cfg=DEFAULT_CONFIG, domain_radius=None, jobs=1, panels=4, order=16):
    """int f (L_K g) dx over the support of f."""
    n = k.params.n
    for name, h in (("f", f), ("g", g)):
        if h.support_radius is None:
            raise PreconditionError(f"{name} must be compactly supported")
        if domain_radius is not None and (
                np.linalg.norm(h.center_array) + h.support_radius > domain_radius):
            raise PreconditionError(f"support of {name} leaves the domain radius {domain_radius}")
    gpts, _ = ball_nodes(n, g.support_radius, (g,), g.center_array, panels, order, cfg.angular)
    if not np.any(np.asarray(g.evaluate(gpts)) != 0.0):
        return 0.0
    # L_K g varies on the scale of g, so refine f's grid when g is the smaller one
    fine = panels * max(1, math.ceil(f.support_radius / g.support_radius))
    pts, w = ball_nodes(n, f.support_radius, (f,), f.center_array, fine, order, cfg.angular)
    fv = np.asarray(f.evaluate(pts), dtype=float)
    live = fv != 0.0
    lg, _ = operator_values(k, g, pts[live], cfg, jobs)
    return float((w[live] * fv[live]) @ lg)


# ---------------------------------------------------------------- weak form

@dataclass
class WeakResidual:
    value: float
    error_budget: float
    lhs: float
    rhs: float
    tail_bound: float

    def __float__(self):
        return self.value


def _check_nonnegative(vals):
    if np.any(np.asarray(vals) < 0.0):
        raise PreconditionError("field takes negative values on the sample nodes")


def exterior_decay_bound(k, u, R, r_start):
    """Bound on int_{|x| > r_start} |u| |L phi_R| for r_start >= 4R.

    Uses |L phi_R(x)| <= Lam |B_{2R}| 2^{n+2s} |x|^{-n-2s} there.
    """
    n, s, Lam = k.params.n, k.params.s, k.params.Lam
    if u.support_radius is not None and np.linalg.norm(u.center_array) + u.support_radius <= r_start:
        return 0.0
    if u.decay is None:
        raise PreconditionError("field must declare its decay (tail-space membership)")
    beta, cu = u.decay
    if beta + 2 * s <= 0:
        raise TailSpaceError(f"u with decay exponent {beta} is not in the tail space for s={s}")
    grow = 1.0 if beta >= 0 else 2.0 ** (-beta)
    return (cu * grow * Lam * ball_volume(n, 2 * R) * 2.0 ** (n + 2 * s)
            * sphere_area(n) * r_start ** (-beta - 2 * s) / (beta + 2 * s))


def weak_supersolution_residual(k, u, q, family, cfg=DEFAULT_CONFIG, jobs=1, terms=DYADIC_TERMS):
    """int u L_K phi_R - int u^q phi_R with an error budget.

    B_{2R} by a composite rule with the symmetrized operator; the exterior by
    dyadic annuli 2^k R <= |x| < 2^{k+1} R, k = 1..terms, with the direct
    integral for L_K phi_R; beyond that the declared-decay bound.
    """
    if q <= 1:
        raise PreconditionError("q must exceed 1")
    n = k.params.n
    R = family.R
    phi = family.phi
    pts, w = ball_nodes(n, 2 * R, (u, phi), None, 4, 16, cfg.angular)
    uv = np.asarray(u.evaluate(pts), dtype=float)
    _check_nonnegative(uv)
    tb = exterior_decay_bound(k, u, R, 2.0 ** (terms + 1) * R)
    if not np.any(uv):
        return WeakResidual(0.0, tb, 0.0, 0.0, tb)
    lv, le = operator_values(k, phi, pts, cfg, jobs)
    lhs = float((w * uv) @ lv)
    err = float((w * uv) @ le)
    pv = np.asarray(phi.evaluate(pts), dtype=float)
    rhs = float((w * uv**q) @ pv)
    for j in range(1, terms + 1):
        apts, aw = annulus_nodes(n, 2.0**j * R, 2.0 ** (j + 1) * R, 16, cfg.angular)
        au = np.asarray(u.evaluate(apts), dtype=float)
        _check_nonnegative(au)
        if not np.any(au):
            continue
        lv, le = operator_values(k, phi, apts, cfg, jobs)
        lhs += float((aw * au) @ lv)
        err += float((aw * au) @ le)
    return WeakResidual(lhs - rhs, err + tb, lhs, rhs, tb)


def lp_norm_power(k, family, p, cfg=DEFAULT_CONFIG, jobs=1, terms=DYADIC_TERMS):
    """int |L_K phi_R|^p dx: B_{2R}, then dyadic annuli, then an analytic tail.

    Beyond 2^{terms+1} R the bound (Lam |B_{2R}| 2^{n+2s})^p |x|^{-p(n+2s)}
    is integrated in closed form.  Returns (value, tail_bound).
    """
    n, s, Lam = k.params.n, k.params.s, k.params.Lam
    R = family.R
    phi = family.phi
    pts, w = ball_nodes(n, 2 * R, (phi,), None, 4, 16, cfg.angular)
    lv, _ = operator_values(k, phi, pts, cfg, jobs)
    total = float(w @ np.abs(lv) ** p)
    for j in range(1, terms + 1):
        apts, aw = annulus_nodes(n, 2.0**j * R, 2.0 ** (j + 1) * R, 16, cfg.angular)
        lv, _ = operator_values(k, phi, apts, cfg, jobs)
        total += float(aw @ np.abs(lv) ** p)
    r0 = 2.0 ** (terms + 1) * R
    amp = Lam * ball_volume(n, 2 * R) * 2.0 ** (n + 2 * s)
    expo = p * (n + 2 * s) - n
    tail = amp**p * sphere_area(n) * r0 ** (-expo) / expo
    return total, tail
