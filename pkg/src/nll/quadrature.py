"""Principal-value integrals of L_K u(x) through the symmetrized second difference.

    L_K u(x) = 1/2 int (2u(x) - u(x+z) - u(x-z)) K(z) dz

is split at |z| = r_in and |z| = R_out.  The inner ball uses Gauss-Jacobi
nodes with weight r^{1-2s}, which integrates the leading Taylor term of the
O(|z|^2) integrand exactly.  The middle shell is integrated adaptively in
t = log r with batched Gauss-Kronrod (7, 15) panels.  Beyond R_out the local
term 2u(x)K is integrated exactly and the rest is bounded from the declared
decay of u and the upper bound Lam |z|^{-n-2s}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi

from . import _backend
from .errors import AccuracyNotReached, DomainError, PreconditionError, TailSpaceError
from .geometry import half_sphere_rule, sphere_area

# Gauss-Kronrod 15-point abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes sit at odd positions of the Kronrod set
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
G_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])

MAX_PANELS = 200_000


@dataclass(frozen=True)
class QuadratureConfig:
    r_in: float = 1e-3
    R_out: float = 1e3
    tol: float = 1e-6
    depth: int = 30
    angular: int = 64
    # error target is tol * max(|value|, rel_floor * int |integrand|), so that
    # values near a sign change are judged against the integrand's size
    rel_floor: float = 1e-3
    jacobi_order: int = 12

    def __post_init__(self):
        if not (0.0 < self.r_in < self.R_out):
            raise PreconditionError("need 0 < r_in < R_out")
        if not (0.0 < self.tol < 1.0):
            raise PreconditionError("tol must lie in (0, 1)")
        if self.depth < 1 or self.angular < 1:
            raise PreconditionError("depth and angular resolution must be positive")

    def replace(self, **changes):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(changes)
        return QuadratureConfig(**d)


DEFAULT_CONFIG = QuadratureConfig()


@dataclass
class QuadResult:
    value: float
    error: float
    tail_bound: float
    evaluations: int
    # contribution of |z| <= r_in (or of the whole support for the exterior route)
    inner: float = 0.0
    flags: list = field(default_factory=list)


@dataclass
class _Panels:
    fn: object
    lo: np.ndarray
    hi: np.ndarray
    level: np.ndarray
    val: np.ndarray = None
    err: np.ndarray = None
    l1: np.ndarray = None


def _eval_panels(fn, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * GK_NODES[None, :]
    f = np.asarray(fn(nodes.ravel()), dtype=float).reshape(nodes.shape)
    if not np.all(np.isfinite(f)):
        raise DomainError("integrand is not finite at a quadrature node")
    k = half * (f @ GK_WEIGHTS)
    g = half * (f[:, _G_IDX] @ G_WEIGHTS)
    l1 = half * (np.abs(f) @ GK_WEIGHTS)
    return k, np.abs(k - g), l1, f.size


def adaptive_gk(segments, *, tol, rel_floor=0.0, depth=30, offset=0.0, offset_l1=0.0,
                fixed_error=0.0, atol=0.0):
    """Integrate a sum of 1-D integrals by batched global bisection.

    ``segments`` is a list of ``(fn, breakpoints)``; ``fn`` is vectorized over
    node arrays and each consecutive pair of breakpoints starts one panel.
    Stops once the summed |K15 - G7| plus ``fixed_error`` is at most
    ``max(tol * max(|V|, rel_floor * L1), atol)``, with V and L1 including the
    offsets.  Every round bisects all panels whose error is within a factor 8
    of the largest splittable one, so the refinement path does not depend on
    ``tol``.

    Returns (value, error, l1, evaluations).
    """
    pans = []
    nev = 0
    for fn, bps in segments:
        bps = np.asarray(bps, dtype=float)
        lo, hi = bps[:-1], bps[1:]
        keep = hi > lo
        p = _Panels(fn, lo[keep], hi[keep], np.zeros(keep.sum(), dtype=int))
        p.val, p.err, p.l1, m = _eval_panels(fn, p.lo, p.hi)
        nev += m
        pans.append(p)
    while True:
        value = offset + sum(p.val.sum() for p in pans)
        l1 = offset_l1 + sum(p.l1.sum() for p in pans)
        err = fixed_error + sum(p.err.sum() for p in pans)
        target = max(tol * max(abs(value), rel_floor * l1), atol)
        if err <= target:
            return value, err, l1, nev
        splittable = [np.where(p.level < depth, p.err, 0.0) for p in pans]
        emax = max((e.max() if e.size else 0.0) for e in splittable)
        if emax <= 0.0 or sum(p.lo.size for p in pans) > MAX_PANELS:
            raise AccuracyNotReached(
                f"refinement budget exhausted: error {err:.3g} > target {target:.3g}",
                value, err,
            )
        for p, e in zip(pans, splittable):
            sel = e >= emax / 8.0
            if not sel.any() or emax == 0.0:
                continue
            sel &= e > 0.0
            lo, hi, lv = p.lo[sel], p.hi[sel], p.level[sel] + 1
            mid = 0.5 * (lo + hi)
            nlo = np.concatenate([lo, mid])
            nhi = np.concatenate([mid, hi])
            nlv = np.concatenate([lv, lv])
            v, er, a, m = _eval_panels(p.fn, nlo, nhi)
            nev += m
            keep = ~sel
            p.lo = np.concatenate([p.lo[keep], nlo])
            p.hi = np.concatenate([p.hi[keep], nhi])
            p.level = np.concatenate([p.level[keep], nlv])
            p.val = np.concatenate([p.val[keep], v])
            p.err = np.concatenate([p.err[keep], er])
            p.l1 = np.concatenate([p.l1[keep], a])


def _value_at(u, x):
    v = np.asarray(u.evaluate(np.asarray(x, dtype=float)[None, :]), dtype=float).ravel()[0]
    if not math.isfinite(v):
        raise DomainError(f"field is not finite at {list(x)}")
    return float(v)


def second_difference(u, x, z):
    """2u(x) - u(x+z) - u(x-z) for a point x and one or many offsets z."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.asarray(z, dtype=float)
    single = z.ndim <= 1
    z = z.reshape(-1, u.n)
    d = 2.0 * _value_at(u, x) - u.evaluate(x + z) - u.evaluate(x - z)
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)):
        raise DomainError("field is not finite at x + z or x - z")
    return float(d[0]) if single else d


class _Integrand:
    """F(r) = sum_k w_k K(r d_k) D(x, r d_k) over a half-sphere direction set."""

    def __init__(self, u, k, x, dirs, w):
        self.u, self.k, self.x = u, k, np.ascontiguousarray(x, dtype=float)
        self.dirs = np.ascontiguousarray(dirs)
        self.w = w
        self.calls = 0
        self.ux = _value_at(u, self.x)
        self.radial = u.radial
        if self.radial is not None:
            self._params = np.asarray(self.radial.params, dtype=float)
            self._center = np.ascontiguousarray(self.radial.center, dtype=float)

    def __call__(self, r):
        r = np.ascontiguousarray(r, dtype=float)
        kw = np.ascontiguousarray(self.k.on_grid(r, self.dirs) * self.w[None, :])
        self.calls += 2 * kw.size
        if self.radial is not None:
            out = _backend.core.sym_diff_weighted(
                self.radial.code, self._params, self._center, self.x, r, self.dirs, kw)
            return self.radial.amplitude * np.asarray(out)
        z = r[:, None, None] * self.dirs[None, :, :]
        d = 2.0 * self.ux - self.u.evaluate(self.x + z) - self.u.evaluate(self.x - z)
        return (kw * d).sum(axis=1)


@lru_cache(maxsize=64)
def _jacobi(order, beta):
    x, w = roots_jacobi(order, 0.0, beta)
    return x, w


def _jacobi_inner(F, n, s, r_in, order):
    """int_0^{r_in} r^{n-1} F(r) dr with weight r^{1-2s} factored out."""
    beta = 1.0 - 2.0 * s
    x, w = _jacobi(order, beta)
    r = 0.5 * r_in * (1.0 + x)
    g = F(r) * r ** (n + 2.0 * s - 2.0)
    return (0.5 * r_in) ** (beta + 1.0) * float(w @ g)


def tail_bound(u, k, x, R_out):
    """Bound on |1/2 int_{|z|>R_out} (u(x+z) + u(x-z)) K(z) dz|."""
    p = k.params
    xa = np.asarray(x, dtype=float)
    if u.support_radius is not None:
        reach = float(np.linalg.norm(xa - u.center_array)) + u.support_radius
        if R_out >= reach:
            return 0.0
    if u.decay is None:
        raise PreconditionError("field declares neither decay nor compact support")
    beta, cu = u.decay
    if beta + 2.0 * p.s <= 0.0:
        raise TailSpaceError(
            f"decay exponent {beta} gives a divergent tail against |z|^(-n-2s) with s={p.s}")
    xn = float(np.linalg.norm(xa))
    if R_out < 2.0 * (1.0 + xn):
        raise PreconditionError(f"R_out={R_out} must be at least 2(1+|x|) = {2 * (1 + xn)}")
    factor = 2.0**beta if beta >= 0 else 1.5 ** (-beta)
    return p.Lam * cu * factor * sphere_area(p.n) * R_out ** (-beta - 2.0 * p.s) / (beta + 2.0 * p.s)


def _breakpoints(u, x, r_in, R_out, width=0.5):
    """Initial panel edges in t = log r, refined at radii where D has features."""
    t0, t1 = math.log(r_in), math.log(R_out)
    m = max(1, math.ceil((t1 - t0) / width))
    bps = list(np.linspace(t0, t1, m + 1))
    if u.radial is not None:
        d = float(np.linalg.norm(np.asarray(x, dtype=float) - u.center_array))
        for f in u.radial.features:
            for r in (abs(d - f), d + f):
                if r_in < r < R_out:
                    bps.append(math.log(r))
    return np.unique(bps)


def _inner_breakpoints(u, x, r_in):
    bps = [0.0, 1.0]
    if u.radial is not None:
        d = float(np.linalg.norm(np.asarray(x, dtype=float) - u.center_array))
        for f in u.radial.features:
            for r in (abs(d - f), d + f):
                if 0.0 < r < r_in:
                    bps.append(math.sqrt(r / r_in))
    if len(bps) == 2:
        bps = list(np.linspace(0.0, 1.0, 5))
    return np.unique(bps)


def pv_integrate(u, k, x, cfg=DEFAULT_CONFIG, method="auto"):
    """L_K u(x) as a QuadResult.

    ``method`` is "pv" for the symmetrized route, "exterior" for the direct
    integral -int u(y) K(y - x) dy (only when x lies outside the support of u),
    or "auto", which takes the exterior route for compactly supported fields
    in n >= 2 where the angular product rule cannot resolve a distant support.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n, s = k.params.n, k.params.s
    if x.shape != (n,) or u.n != n:
        raise PreconditionError(f"point, field and kernel dimensions disagree (n={n})")
    if u.decay is None and u.support_radius is None:
        raise PreconditionError("pv_integrate needs declared decay or compact support of u")
    outside = (u.support_radius is not None
               and float(np.linalg.norm(x - u.center_array)) > u.support_radius)
    if method == "exterior" or (method == "auto" and outside and n >= 2):
        if u.support_radius is None or (
                float(np.linalg.norm(x - u.center_array)) < u.support_radius * (1 - 1e-12)):
            raise PreconditionError("exterior route needs x outside the support of u")
        return exterior_integral(u, k, x, cfg)

    flags = []
    if u.smoothness == "rough":
        flags.append("best-effort: field is not C2")
    dirs, w = half_sphere_rule(n, cfg.angular)
    F = _Integrand(u, k, x, dirs, w)
    if u.radial is not None and u.radial.code == _backend.CONST:
        # the second difference vanishes at every radius, far field included
        tb = local_tail = 0.0
    else:
        tb = tail_bound(u, k, x, cfg.R_out)
        local_tail = 2.0 * F.ux * k.tail_mass(cfg.R_out, dirs, w)

    i_lo = _jacobi_inner(F, n, s, cfg.r_in, cfg.jacobi_order)
    i_hi = _jacobi_inner(F, n, s, cfg.r_in, 2 * cfg.jacobi_order)
    inner_err = abs(i_hi - i_lo)

    def shell(t):
        r = np.exp(t)
        return F(r) * r**n

    seg_shell = (shell, _breakpoints(u, x, cfg.r_in, cfg.R_out))
    common = dict(tol=cfg.tol, rel_floor=cfg.rel_floor, depth=cfg.depth)

    # a first look at the scale of the answer decides whether the Jacobi rule suffices
    bps = seg_shell[1]
    pv, _, pl1, _ = _eval_panels(shell, bps[:-1], bps[1:])
    probe = pv.sum() + i_hi + local_tail
    scale = max(abs(probe), cfg.rel_floor * (pl1.sum() + abs(i_hi) + abs(local_tail)))
    if inner_err <= 0.25 * cfg.tol * scale:
        value, err, l1, _ = adaptive_gk(
            [seg_shell], offset=i_hi + local_tail,
            offset_l1=abs(i_hi) + abs(local_tail), fixed_error=inner_err, **common)
        inner = i_hi
        err_total = err
    else:
        r_in = cfg.r_in

        def core_piece(v):
            r = r_in * v * v
            return F(r) * r ** (n - 1) * 2.0 * r_in * v

        flags.append("adaptive inner ball")
        value, err, l1, _ = adaptive_gk(
            [(core_piece, _inner_breakpoints(u, x, r_in)), seg_shell],
            offset=local_tail, offset_l1=abs(local_tail), **common)
        inner = float("nan")
        err_total = err
    return QuadResult(
        value=float(value),
        # summation rounding, so that |value - exact| <= error holds to the last ulp
        error=float(err_total + tb + 16 * np.finfo(float).eps * l1),
        tail_bound=float(tb),
        evaluations=int(F.calls),
        inner=float(inner),
        flags=flags,
    )


def _frame(e):
    """Orthonormal basis whose first vector is e."""
    n = e.size
    m = np.eye(n)
    m[:, 0] = e
    q, _ = np.linalg.qr(m)
    if q[:, 0] @ e < 0:
        q = -q
    return q


def _support_radial_panels(u, panels_per_unit=2, order=32):
    rho = u.support_radius
    bps = [0.0, rho]
    if u.radial is not None:
        bps += [f for f in u.radial.features if 0.0 < f < rho]
    bps = np.unique(bps)
    edges = []
    for a, b in zip(bps[:-1], bps[1:]):
        m = max(2, panels_per_unit)
        edges.extend(np.linspace(a, b, m + 1)[:-1])
    edges.append(rho)
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = np.asarray(edges[:-1]), np.asarray(edges[1:])
    r = (0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * xg[None, :]).ravel()
    wr = (0.5 * (hi - lo)[:, None] * wg[None, :]).ravel()
    return r, wr


def exterior_integral(u, k, x, cfg=DEFAULT_CONFIG):
    """-int_{B_rho(c)} u(y) K(y - x) dy for x outside the open support ball of u.

    No singularity is present; this is the independent route for points off
    the support.  1-D uses adaptive Gauss-Kronrod in y; n = 2, 3 use a radial
    Gauss-Legendre rule about the support center times an adaptive rule in the
    polar angle measured from the direction of x.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = k.params.n
    if u.support_radius is None:
        raise PreconditionError("exterior route needs a compactly supported field")
    c = u.center_array
    d = float(np.linalg.norm(x - c))
    rho = u.support_radius
    if d < rho * (1 - 1e-12):
        raise PreconditionError("exterior route needs x outside the support of u")
    d = max(d, rho)
    calls = [0]

    if n == 1:
        def f(y):
            y = np.asarray(y, dtype=float)[:, None]
            calls[0] += y.size
            return u.evaluate(y) * k.evaluate(y - x)

        bps = [c[0] - rho, c[0] + rho]
        if u.radial is not None:
            for fr in u.radial.features:
                bps += [c[0] - fr, c[0] + fr]
        bps = np.unique(np.clip(bps, c[0] - rho, c[0] + rho))
        edges = np.unique(np.concatenate([np.linspace(a, b, 5) for a, b in zip(bps[:-1], bps[1:])]))
        val, err, _, _ = adaptive_gk([(f, edges)], tol=cfg.tol * 1e-2, depth=cfg.depth)
        return QuadResult(-float(val), float(err), 0.0, calls[0], inner=-float(val), flags=["exterior"])

    r, wr = _support_radial_panels(u)
    frame = _frame((x - c) / d)
    if u.radial is not None:
        # u is constant on each sphere about c, so one profile value per radial node
        prof = u.radial(r)

        def uw(y):
            return prof
    else:
        uw = u.evaluate
    if n == 2:
        def g(psi):
            om = np.column_stack([np.cos(psi), np.sin(psi)]) @ frame.T
            y = c + r[None, :, None] * om[:, None, :]
            calls[0] += y.shape[0] * y.shape[1]
            return (k.evaluate(y - x) * uw(y)) @ (wr * r)

        edges = np.linspace(-np.pi, np.pi, 17)
    else:
        phi = 2.0 * np.pi * np.arange(cfg.angular) / cfg.angular
        wphi = 2.0 * np.pi / cfg.angular

        def g(psi):
            ct, st = np.cos(psi), np.sin(psi)
            local = np.stack([
                np.repeat(ct[:, None], phi.size, axis=1),
                st[:, None] * np.cos(phi)[None, :],
                st[:, None] * np.sin(phi)[None, :],
            ], axis=-1)
            om = local @ frame.T
            y = c + r[None, None, :, None] * om[:, :, None, :]
            calls[0] += y.shape[0] * y.shape[1] * y.shape[2]
            return ((k.evaluate(y - x) * uw(y)) @ (wr * r * r)).sum(axis=1) * wphi * st

        edges = np.linspace(0.0, np.pi, 9)
    val, err, _, _ = adaptive_gk([(g, edges)], tol=cfg.tol * 1e-2, depth=cfg.depth)
    return QuadResult(-float(val), float(err), 0.0, calls[0], inner=-float(val), flags=["exterior"])
