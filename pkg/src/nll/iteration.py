"""Regime classification and the exponent/constant recursions behind the Liouville argument."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import math
from typing import Optional

import numpy as np

from .errors import InternalConsistencyError, ParameterDomainError, PreconditionError, RegimeError
from .geometry import sphere_area
from .mass_analysis import ball_integral
from .operator import (CutoffFamily, ball_nodes, lp_norm_power, make_bump, operator_values,
                       verify_cutoff_bound)
from .quadrature import DEFAULT_CONFIG

SUBCRITICAL = "subcritical-trivial"
CRITICAL = "critical-trivial"
SUPERCRITICAL = "supercritical-sharpness"
LOW_DIMENSION = "low-dimension-trivial"
TRIVIAL_REGIMES = (SUBCRITICAL, CRITICAL, LOW_DIMENSION)

TIE_ZONE = 1e-9
# floats are read as the simplest fraction that rounds to them
_MAX_DENOMINATOR = 10**9


def exact(v):
    """Rational reading of a number: 1.3333333333333333 -> 4/3, '0.1' -> 1/10."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    f = Fraction(v).limit_denominator(_MAX_DENOMINATOR)
    return f if float(f) == float(v) else Fraction(v)


@dataclass(frozen=True)
class RegimeInput:
    n: int
    s: float
    q: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError("n must be a positive integer")
        if not 0 < float(self.s) < 1:
            raise ParameterDomainError("s must lie in (0, 1)")
        if not float(self.q) > 1:
            raise ParameterDomainError("q must exceed 1")

    @property
    def serrin(self):
        """q_S = n/(n - 2s) as a Fraction, or None when n <= 2s."""
        n, s = Fraction(int(self.n)), exact(self.s)
        if n <= 2 * s:
            return None
        return n / (n - 2 * s)


def serrin_exponent(n, s):
    qs = RegimeInput(n, s, 2.0).serrin
    return None if qs is None else float(qs)


@dataclass
class IterationTrace:
    a: float
    b: float
    q: float
    gammas: list
    constants: list
    gamma_fixed_point: float
    first_negative: Optional[int]
    constant_limit: float
    closed_form_gammas: list = field(repr=False, default_factory=list)
    max_closed_form_gap: float = 0.0
    first_negative_closed_form: Optional[int] = None
    tie: bool = False
    sigma_bound: float = 0.0

    def rows(self):
        return [(m, g, c) for m, (g, c) in enumerate(zip(self.gammas, self.constants))]


@dataclass
class RegimeReport:
    regime: str
    n: int
    s: float
    q: float
    q_S: Optional[float]
    trace: Optional[IterationTrace]
    narrative: str


_NARRATIVE = {
    SUBCRITICAL: ("a = n - 2s - n/q < 0: the exponent recursion gamma_{m+1} = a + gamma_m/q "
                  "reaches a negative gamma_M, so S(R) <= C_M R^{gamma_M} -> 0 and u = 0."),
    CRITICAL: ("a = 0: gamma_m = n q^{-m} -> 0 with C_m bounded, so u is in L^q; splitting "
               "int u |L phi_R| into J1 (B_rho) and J2 (outside) then forces u = 0."),
    LOW_DIMENSION: ("n <= 2s: a = (n - 2s) - n/q < 0 for every q > 1, and the subcritical "
                    "iteration applies unchanged."),
    SUPERCRITICAL: ("q > q_S: c(1 + |x|)^{-2s/(q-1)} is a positive supersolution for small c, "
                    "so no Liouville statement holds."),
}


def classify(inp, C0=1.0, Cbar=1.0, max_steps=200):
    """Regime by exact rational comparison of q with n/(n - 2s)."""
    n = Fraction(int(inp.n))
    s, q = exact(inp.s), exact(inp.q)
    qs = inp.serrin
    if n <= 2 * s:
        regime = LOW_DIMENSION
    elif q < qs:
        regime = SUBCRITICAL
    elif q == qs:
        regime = CRITICAL
    else:
        regime = SUPERCRITICAL
    trace = None
    if regime in TRIVIAL_REGIMES:
        trace = iterate_exponents(inp, C0, Cbar, max_steps, _regime=regime)
    return RegimeReport(regime, int(inp.n), float(inp.s), float(inp.q),
                        None if qs is None else float(qs), trace, _NARRATIVE[regime])


def gamma_closed_form(n, a, q, m):
    """gamma_m = gamma_inf + (n - gamma_inf) q^{-m}."""
    g_inf = a / (1.0 - 1.0 / q)
    return g_inf + (n - g_inf) * q ** (-m)


def first_negative_closed_form(n, a, q):
    """ceil(log_q((n - gamma_inf) / (-gamma_inf))) for a < 0; None otherwise.

    Returns (M, tie) where tie marks a logarithm within TIE_ZONE of an integer.
    """
    if a >= 0:
        return None, False
    g_inf = a / (1.0 - 1.0 / q)
    L = math.log((n - g_inf) / (-g_inf)) / math.log(q)
    M = math.ceil(L)
    return M, abs(L - round(L)) < TIE_ZONE


def iterate_exponents(inp, C0=1.0, Cbar=1.0, max_steps=200, a_override=None, _regime=None):
    """gamma_{m+1} = a + gamma_m/q, C_{m+1} = Cbar C_m^{1/q}, from gamma_0 = n."""
    if max_steps < 1:
        raise ParameterDomainError("max_steps must be at least 1")
    if C0 <= 0 or Cbar <= 0:
        raise ParameterDomainError("C0 and Cbar must be positive")
    regime = _regime or classify(inp, max_steps=1).regime
    if regime == SUPERCRITICAL and a_override is None:
        raise RegimeError("the iteration only closes for q <= q_S (or n <= 2s)")
    n, s, q = float(inp.n), float(inp.s), float(inp.q)
    b = 2.0 * s + n / q
    if a_override is not None:
        a = float(a_override)
    elif regime == CRITICAL:
        a = 0.0
    else:
        a = n - 2.0 * s - n / q
    g_inf = a / (1.0 - 1.0 / q)
    gammas, consts = [n], [float(C0)]
    for _ in range(max_steps):
        gammas.append(a + gammas[-1] / q)
        consts.append(Cbar * consts[-1] ** (1.0 / q))
    closed = [gamma_closed_form(n, a, q, m) for m in range(max_steps + 1)]
    gap = max(abs(g - c) for g, c in zip(gammas, closed))

    M_iter = None
    M_closed, tie = first_negative_closed_form(n, a, q)
    if a < 0:
        g, m = n, 0
        limit = max(max_steps, (M_closed or 0) + 2)
        while g >= 0 and m <= limit:
            g = a + g / q
            m += 1
        M_iter = m if g < 0 else None
        near_zero = M_iter is not None and min(
            abs(gamma_closed_form(n, a, q, M_iter)), abs(gamma_closed_form(n, a, q, M_iter - 1))
        ) < TIE_ZONE
        if M_iter != M_closed:
            if tie or near_zero:
                tie = True
                M_iter = M_closed
            else:
                raise InternalConsistencyError(
                    f"iterated first negative index {M_iter} != closed form {M_closed}")
    sigma = 1.0 / (1.0 - 2.0 ** (-2.0 * s))
    return IterationTrace(
        a=a, b=b, q=q, gammas=gammas, constants=consts, gamma_fixed_point=g_inf,
        first_negative=M_iter, constant_limit=Cbar ** (q / (q - 1.0)),
        closed_form_gammas=closed, max_closed_form_gap=gap,
        first_negative_closed_form=M_closed, tie=tie, sigma_bound=sigma,
    )


def geometric_sigma(trace, s):
    """sum_k 2^{-k(b - gamma_m/q)} for each m, with its uniform bound 1/(1 - 2^{-2s})."""
    out = []
    for g in trace.gammas:
        e = trace.b - g / trace.q
        out.append(1.0 / (1.0 - 2.0 ** (-e)))
    return out, 1.0 / (1.0 - 2.0 ** (-2.0 * s))


# ------------------------------------------------------------ critical case

@dataclass
class CriticalSplit:
    """J1 = int_{B_rho} u |L phi_R| and the Hoelder bound on the rest."""

    R: float
    rho: float
    J1: float
    J1_bound: float
    J1_bound_holds: bool
    local_l1: float
    cutoff_constant: float
    J2_bound: float
    lq_outside: float
    lp_integral: float
    lp_tail: float

    def as_pair(self):
        return self.J1, self.J2_bound


def lq_mass_outside(u, q, rho, R_big=1e6):
    """int_{|x| > rho} u^q, with the declared decay closing the integral beyond R_big."""
    n = u.n
    if u.support_radius is not None:
        far = float(np.linalg.norm(u.center_array)) + u.support_radius
        if far <= rho:
            return 0.0
        return max(ball_integral(u, far, q) - ball_integral(u, rho, q), 0.0)
    if u.decay is None:
        raise PreconditionError("field must declare decay or compact support")
    beta, cu = u.decay
    if beta * q <= n:
        return math.inf
    inner = ball_integral(u, R_big, q) - ball_integral(u, rho, q)
    return max(inner, 0.0) + cu**q * sphere_area(n) * (1.0 + R_big) ** (n - beta * q) / (beta * q - n)


def critical_tail_split(u, k, q, rho, R, cfg=None, family=None, jobs=1, cutoff_constant=None):
    """J1 with its R^{-2s} bound, and J2 <= ||u||_{L^q(B_rho^c)} ||L phi_R||_{n/2s}.

    The cutoff constant defaults to the empirical inner constant of the
    cutoff estimate at scale R.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    n, s = k.params.n, k.params.s
    inp = RegimeInput(n, s, q)
    qs = inp.serrin
    if qs is None or abs(float(q) - float(qs)) > 1e-12:
        raise RegimeError(f"critical split needs q = q_S; got q={q}, q_S={qs and float(qs)}")
    if not 0 < rho < R:
        raise ParameterDomainError("need 0 < rho < R")
    family = (family or CutoffFamily(make_bump(n))).at(R)
    phi = family.phi
    pts, w = ball_nodes(n, rho, (u,), None, 4, 16, cfg.angular)
    uv = np.asarray(u.evaluate(pts), dtype=float)
    if not np.any(uv):
        return CriticalSplit(R, rho, 0.0, 0.0, True, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    lv, _ = operator_values(k, phi, pts, cfg, jobs)
    J1 = float((w * uv) @ np.abs(lv))
    l1 = ball_integral(u, rho, 1.0)
    if cutoff_constant is None:
        cutoff_constant = verify_cutoff_bound(k, family, [R], cfg, jobs)[0].inner_constant
    bound = cutoff_constant * R ** (-2.0 * s) * l1
    p = n / (2.0 * s)
    lp, lp_tail = lp_norm_power(k, family, p, cfg, jobs)
    outside = lq_mass_outside(u, q, rho)
    J2 = outside ** (1.0 / q) * (lp + lp_tail) ** (1.0 / p)
    return CriticalSplit(R, rho, J1, bound, J1 <= bound * (1.0 + cfg.tol), l1,
                         cutoff_constant, J2, outside, lp, lp_tail)


def critical_split_scan(u, k, q, rho=1.0, multiples=(4, 8, 16), cfg=None, jobs=1):
    """Splits at R = m rho with the per-doubling J1 ratios and the spread of int |L phi_R|^{n/2s}."""
    splits = [critical_tail_split(u, k, q, rho, m * rho, cfg, jobs=jobs) for m in multiples]
    ratios = [b.J1 / a.J1 if a.J1 else None for a, b in zip(splits, splits[1:])]
    lps = [sp.lp_integral for sp in splits]
    spread = max(lps) / min(lps) if min(lps) > 0 else None
    return splits, ratios, spread
