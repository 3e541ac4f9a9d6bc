"""``nll``: command-line entry point writing CSV artifacts and a JSON report."""
from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass, field
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, suite
from ._backend import BACKEND
from .errors import ConfigError, NLLError
from .fields import (bubble_field, bump_field, cosine_field, fractional_bubble, power_decay_field,
                     zero_field)
from .iteration import RegimeInput, classify, critical_split_scan, iterate_exponents
from .kernels import (KernelParams, fractional_constant, make_anisotropic_kernel,
                      make_fractional_kernel, table_profile, validate_kernel)
from .mass_analysis import mass_profile, verify_dyadic_inequality, verify_growth_bound
from .operator import CutoffFamily, apply_operator, cutoff_uniformity, make_bump, pairing, verify_cutoff_bound
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .sharpness import SHARPNESS_CONFIG, default_radii, sharpness_report

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA = "nll-report/1"
STATUSES = ("pass", "fail", "degenerate", "exploratory")

SCENARIOS = {
    "operator-eval": ("kernel-valid", "operator-values"),
    "cutoff-verify": ("cutoff-inner-uniformity", "cutoff-outer-uniformity"),
    "pairing-check": ("pairing-disjoint", "pairing-overlap"),
    "mass-scan": ("mass-monotone", "growth-bound", "dyadic-inequality"),
    "classify": ("classification",),
    "iterate": ("closed-form", "gamma-limit", "constant-limit"),
    "critical-split": ("j1-bound", "j1-scaling", "lp-uniformity"),
    "sharpness": ("calibration", "margins", "scaling-identity", "weak-residual"),
    "full-suite": tuple(f"criterion-{i}" for i in range(1, 11)),
}

REQUIRED = {
    "operator-eval": ("n", "s"),
    "cutoff-verify": ("n", "s"),
    "pairing-check": ("n", "s"),
    "mass-scan": ("n", "s", "q"),
    "classify": ("n", "s", "q"),
    "iterate": ("n", "s", "q"),
    "critical-split": ("n", "s"),
    "sharpness": ("n", "s", "q"),
    "full-suite": (),
}

OPTION_DEFAULTS = {
    "operator-eval": {"field": "bump", "points": None, "scale": 1.0, "xi": 1.0, "alpha": 2.0,
                      "count": 8},
    "cutoff-verify": {"scales": [1, 2, 4, 8, 16], "ratio_limit": 1.25},
    "pairing-check": {"tolerance": 1e-6},
    "mass-scan": {"field": "power", "beta": 2.0, "base_radius": 1.0, "doublings": 6, "kmax": 40,
                  "spread_limit": 10.0},
    "classify": {},
    "iterate": {"c0": 1.0, "cbar": 1.0, "max_steps": 200},
    "critical-split": {"rho": 1.0, "multiples": [4, 8, 16], "beta": 2.0, "tolerance": 0.15,
                       "ratio_limit": 1.25},
    "sharpness": {"safety": 0.9, "radii": None, "exploratory": False, "weak_scales": [1, 2, 4]},
    "full-suite": {},
}

KERNEL_KINDS = ("fractional", "anisotropic", "custom-table")
QUAD_KEYS = tuple(QuadratureConfig.__dataclass_fields__)


# ------------------------------------------------------------------ config

@dataclass
class RunConfig:
    scenario: str
    problem: dict
    kernel: dict
    quadrature: QuadratureConfig
    options: dict
    out: str = "nll-out"
    seed: int = 0
    jobs: int = 1

    def echo(self):
        d = asdict(self)
        d["quadrature"] = {k: getattr(self.quadrature, k) for k in QUAD_KEYS}
        return d


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", "config") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed config: {e}", "config") from e


def _number(value, path, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number, got {value!r}", path)
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{path} must be an integer", path)
        return int(value)
    return float(value)


def build_config(raw):
    """Validate a nested config dict (as read from TOML, flags already merged)."""
    raw = dict(raw)
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {sorted(SCENARIOS)}, got {scenario!r}", "scenario")
    problem = dict(raw.get("problem") or {})
    kernel = dict(raw.get("kernel") or {})
    for key in ("n", "s"):
        if key in kernel:
            if key in problem and problem[key] != kernel[key]:
                raise ConfigError(f"kernel.{key} disagrees with problem.{key}", f"kernel.{key}")
            problem[key] = kernel.pop(key)
    for key in REQUIRED[scenario]:
        if problem.get(key) is None:
            raise ConfigError(f"scenario {scenario} needs problem.{key}", f"problem.{key}")
    unknown = set(problem) - {"n", "s", "q"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key problem.{key}", f"problem.{key}")
    if "n" in problem:
        problem["n"] = _number(problem["n"], "problem.n", int)
        if not 1 <= problem["n"] <= 3:
            raise ConfigError("problem.n must be 1, 2 or 3", "problem.n")
    if "s" in problem:
        problem["s"] = _number(problem["s"], "problem.s")
        if not 0 < problem["s"] < 1:
            raise ConfigError("problem.s must lie in (0, 1)", "problem.s")
    if problem.get("q") is not None:
        problem["q"] = _number(problem["q"], "problem.q")
        if not problem["q"] > 1:
            raise ConfigError("problem.q must exceed 1", "problem.q")

    kind = kernel.setdefault("kind", "fractional")
    if kind not in KERNEL_KINDS:
        raise ConfigError(f"kernel.kind must be one of {KERNEL_KINDS}", "kernel.kind")
    for key in ("lam", "Lam", "anisotropy"):
        if key in kernel:
            kernel[key] = _number(kernel[key], f"kernel.{key}")
    if kind == "custom-table" and "profile_csv" not in kernel:
        raise ConfigError("custom-table kernels need kernel.profile_csv", "kernel.profile_csv")

    quad = dict(raw.get("quadrature") or {})
    for key in quad:
        if key not in QUAD_KEYS:
            raise ConfigError(f"unknown key quadrature.{key}", f"quadrature.{key}")
        quad[key] = _number(quad[key], f"quadrature.{key}",
                            int if key in ("depth", "angular", "jacobi_order") else float)
    # one key at a time first, so a bad value is reported at its own path
    for key, value in quad.items():
        try:
            QuadratureConfig(**{key: value})
        except NLLError as e:
            raise ConfigError(str(e), f"quadrature.{key}") from e
    try:
        qcfg = QuadratureConfig(**quad)
    except NLLError as e:
        raise ConfigError(str(e), "quadrature") from e

    options = dict(OPTION_DEFAULTS[scenario])
    for key, value in (raw.get("options") or {}).items():
        if key not in options:
            raise ConfigError(f"option {key} does not apply to {scenario}", f"options.{key}")
        options[key] = value

    out = str(raw.get("out", "nll-out"))
    seed = _number(raw.get("seed", 0), "seed", int)
    jobs = _number(raw.get("jobs", 1), "jobs", int)
    if jobs < 1:
        raise ConfigError("jobs must be at least 1", "jobs")
    return RunConfig(scenario, problem, kernel, qcfg, options, out, seed, jobs)


def read_profile_csv(path):
    """(angle, value) rows; a header line is skipped if present."""
    angles, values = [], []
    try:
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    a, v = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if i == 0:
                        continue
                    raise ConfigError(f"bad profile row {i + 1}: {row}", "kernel.profile_csv")
                angles.append(a)
                values.append(v)
    except OSError as e:
        raise ConfigError(f"cannot read profile table: {e}", "kernel.profile_csv") from e
    if len(angles) < 2:
        raise ConfigError("profile table needs at least two rows", "kernel.profile_csv")
    return angles, values


def build_kernel(rc):
    n, s = rc.problem["n"], rc.problem["s"]
    kind = rc.kernel["kind"]
    if kind == "fractional":
        k = make_fractional_kernel(KernelParams(n, s))
        if "lam" in rc.kernel or "Lam" in rc.kernel:
            k = k.with_bounds(rc.kernel.get("lam"), rc.kernel.get("Lam"))
        return k
    c = fractional_constant(n, s)
    if kind == "anisotropic":
        eps = rc.kernel.get("anisotropy", 0.5)
        if not 0 <= eps < 1:
            raise ConfigError("kernel.anisotropy must lie in [0, 1)", "kernel.anisotropy")

        def profile(d):
            return c * (1.0 + eps * (2.0 * np.asarray(d)[:, 0] ** 2 - 1.0))

        lo, hi = c * (1 - eps), c * (1 + eps)
    else:
        angles, values = read_profile_csv(rc.kernel["profile_csv"])
        profile = table_profile(angles, values)
        lo, hi = min(values), max(values)
    params = KernelParams(n, s, rc.kernel.get("lam", lo), rc.kernel.get("Lam", hi))
    return make_anisotropic_kernel(params, profile)


# ------------------------------------------------------------------ report

@dataclass
class RunReport:
    config: dict
    checks: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__
    backend: str = BACKEND
    schema: str = SCHEMA
    # rows for emit_plot_data: trace, mass, cutoff, margins
    data: dict = field(default_factory=dict)

    @property
    def failed(self):
        return any(c["status"] == "fail" for c in self.checks)

    def to_json(self):
        d = {k: getattr(self, k) for k in ("schema", "version", "backend", "config", "checks",
                                           "artifacts", "timings")}
        return json.dumps(d, indent=2, default=_json_default, sort_keys=False)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _fmt(v):
    if isinstance(v, float) or isinstance(v, np.floating):
        return format(float(v), ".17g")
    return v


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


PLOT_FILES = {
    "trace": ("gamma_vs_m.csv", ("m", "gamma", "C")),
    "mass": ("mass_normalized.csv", ("R", "S_over_Rn")),
    "cutoff": ("cutoff_constants.csv", ("n", "R", "inner", "outer")),
    "margins": ("sharpness_margins.csv", ("r", "margin")),
}


def emit_plot_data(report, out_dir=None):
    """Write the four plot-ready CSVs; absent data gives a header-only file."""
    out_dir = out_dir or report.config.get("out", "nll-out")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for key, (name, header) in PLOT_FILES.items():
        paths[key] = write_csv(os.path.join(out_dir, name), header, report.data.get(key, []))
    return paths


# ---------------------------------------------------------------- scenarios

class _Ctx:
    def __init__(self, rc):
        self.rc = rc
        self.opt = rc.options
        self.cache = {}
        self.data = {}
        self.artifacts = {}
        os.makedirs(rc.out, exist_ok=True)

    def once(self, key, fn):
        if key not in self.cache:
            self.cache[key] = fn()
        return self.cache[key]

    def csv(self, name, header, rows):
        self.artifacts[name] = write_csv(os.path.join(self.rc.out, name), header, rows)

    @property
    def kernel(self):
        return self.once("kernel", lambda: build_kernel(self.rc))


def _ok(flag, detail="", **measured):
    return ("pass" if flag else "fail"), detail, measured


def _parse_points(points, n):
    if isinstance(points, str):
        points = [[float(v) for v in p.split(",")] for p in points.split(";") if p.strip()]
    pts = np.asarray(points, dtype=float)
    if n == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ConfigError(f"points must have {n} coordinates each", "options.points")
    return pts


def _parse_list(v, path):
    if isinstance(v, str):
        try:
            return [float(x) for x in v.split(",") if x.strip()]
        except ValueError as e:
            raise ConfigError(f"{path} must be a comma-separated list of numbers", path) from e
    return [float(x) for x in v]


def _field(name, n, opt, s=None):
    if name == "bump":
        return bump_field(n, float(opt.get("scale", 1.0)))
    if name == "bubble":
        return fractional_bubble(n, s) if s is not None and n > 2 * s else bubble_field(n, 1.0)
    if name == "cosine":
        xi = np.zeros(n)
        xi[0] = float(opt.get("xi", 1.0))
        return cosine_field(xi)
    if name == "power":
        return power_decay_field(n, float(opt.get("alpha", opt.get("beta", 2.0))))
    if name == "zero":
        return zero_field(n)
    raise ConfigError(f"unknown field {name!r}", "options.field")


def _operator_eval(ctx):
    rc, opt = ctx.rc, ctx.opt
    n, s = rc.problem["n"], rc.problem["s"]

    def valid():
        rep = validate_kernel(ctx.kernel)
        return _ok(rep.passed, rep.label, evenness=rep.evenness, lower=rep.lower, upper=rep.upper)

    def values():
        u = _field(opt["field"], n, opt, s)
        if opt["points"] is None:
            rng = np.random.default_rng(rc.seed)
            pts = rng.uniform(-4.0, 4.0, size=(int(opt["count"]), n))
        else:
            pts = _parse_points(opt["points"], n)
        res = apply_operator(ctx.kernel, u, pts, rc.quadrature, rc.jobs)
        rows = [tuple(p) + (r.value, r.error) for p, r in zip(pts.tolist(), res)]
        ctx.csv("operator_eval.csv", [f"x{i + 1}" for i in range(n)] + ["value", "error"], rows)
        finite = all(math.isfinite(r.value) and math.isfinite(r.error) for r in res)
        return _ok(finite, f"{len(res)} points", max_error=max(r.error for r in res))

    return [("kernel-valid", valid), ("operator-values", values)]


def _cutoff_verify(ctx):
    rc, opt = ctx.rc, ctx.opt
    n = rc.problem["n"]
    scales = _parse_list(opt["scales"], "options.scales")

    def reports():
        reps = verify_cutoff_bound(ctx.kernel, CutoffFamily(make_bump(n)), scales, rc.quadrature, rc.jobs)
        rows = []
        for r in reps:
            rows += [(r.R, "inner", x, v) for x, v in r.inner_values]
            rows += [(r.R, "outer", x, v) for x, v in r.outer_values]
        ctx.csv("cutoff_values.csv", ["R", "region", "r", "value"], rows)
        ctx.csv("cutoff_summary.csv", ["R", "inner", "outer"],
                [(r.R, r.inner_constant, r.outer_constant) for r in reps])
        ctx.data["cutoff"] = [(n, r.R, r.inner_constant, r.outer_constant) for r in reps]
        return reps, cutoff_uniformity(reps)

    def branch(i, name):
        def check():
            reps, ratios = ctx.once("cutoff", reports)
            fails = sum(len(r.failures) for r in reps)
            return _ok(ratios[i] <= float(opt["ratio_limit"]) and fails == 0,
                       f"{name} max/min = {ratios[i]:.6g}", ratio=ratios[i], failures=fails)
        return check

    return [("cutoff-inner-uniformity", branch(0, "inner")),
            ("cutoff-outer-uniformity", branch(1, "outer"))]


def _pairing_check(ctx):
    rc, opt = ctx.rc, ctx.opt
    n = rc.problem["n"]
    rows = []

    def shifted(x):
        c = np.zeros(n)
        c[0] = x
        return c

    pairs = {
        "pairing-disjoint": ((0.0, 0.5), (3.0, 0.5)),
        "pairing-overlap": ((0.0, 0.5), (0.5, 0.5)),
    }

    def make(name):
        def check():
            a, b = pairs[name]
            f = bump_field(n, a[1], shifted(a[0]))
            g = bump_field(n, b[1], shifted(b[0]))
            fg = pairing(ctx.kernel, f, g, rc.quadrature, jobs=rc.jobs)
            gf = pairing(ctx.kernel, g, f, rc.quadrature, jobs=rc.jobs)
            gap = abs(fg - gf)
            rows.append((name, fg, gf, gap))
            ctx.csv("pairing.csv", ["pair", "f_Lg", "g_Lf", "gap"], rows)
            return _ok(gap <= float(opt["tolerance"]) * max(1.0, abs(fg)), f"gap {gap:.3g}",
                       f_Lg=fg, g_Lf=gf, gap=gap)
        return check

    return [(name, make(name)) for name in pairs]


def _mass_scan(ctx):
    rc, opt = ctx.rc, ctx.opt
    n, s, q = rc.problem["n"], rc.problem["s"], rc.problem["q"]
    base = float(opt["base_radius"])
    radii = [base * 2.0**j for j in range(int(opt["doublings"]) + 1)]
    kp = KernelParams(n, s)

    def u():
        return _field(opt["field"], n, {"beta": opt["beta"]}, s)

    def profile():
        return mass_profile(ctx.once("u", u), q, radii)

    def monotone():
        prof = ctx.once("profile", profile)
        try:
            prof.check()
            return _ok(True, "nondecreasing", masses=prof.masses)
        except AssertionError as e:
            return _ok(False, str(e), masses=prof.masses)

    def growth():
        rep = verify_growth_bound(ctx.once("profile", profile), n)
        ctx.data["mass"] = list(zip(rep.radii, rep.normalized))
        return _ok(math.isfinite(rep.sup), f"sup S(R)/R^n = {rep.sup:.6g} at R={rep.sup_radius:g}",
                   sup=rep.sup, attained_at_smallest=rep.attained_at_smallest)

    def dyadic():
        d = verify_dyadic_inequality(ctx.once("u", u), q, kp, radii, int(opt["kmax"]))
        ctx.csv("mass_scan.csv", ["R", "S", "ratio", "remainder_bound"],
                [(R, S, "" if r is None else r, rem)
                 for R, S, r, rem in zip(d.radii, d.masses, d.ratios, d.remainders)])
        if d.status == "degenerate-zero":
            return "degenerate", "u vanishes on every annulus", {}
        return _ok(d.spread <= float(opt["spread_limit"]), f"ratio spread {d.spread:.4g}",
                   spread=d.spread, constant=d.constant)

    return [("mass-monotone", monotone), ("growth-bound", growth), ("dyadic-inequality", dyadic)]


def _classify(ctx):
    p = ctx.rc.problem

    def check():
        rep = classify(RegimeInput(p["n"], p["s"], p["q"]), max_steps=1)
        return "pass", rep.narrative, {"regime": rep.regime, "q_S": rep.q_S}

    return [("classification", check)]


def _trace_rows(tr):
    return [(m, g, c) for m, (g, c) in enumerate(zip(tr.gammas, tr.constants))]


def _iterate(ctx):
    p, opt = ctx.rc.problem, ctx.opt
    inp = RegimeInput(p["n"], p["s"], p["q"])

    def trace():
        tr = iterate_exponents(inp, float(opt["c0"]), float(opt["cbar"]), int(opt["max_steps"]))
        ctx.csv("iterate_trace.csv", ["m", "gamma", "C"], _trace_rows(tr))
        ctx.data["trace"] = _trace_rows(tr)[1:]
        return tr

    def closed():
        tr = ctx.once("trace", trace)
        return _ok(tr.max_closed_form_gap <= 1e-12, f"max gap {tr.max_closed_form_gap:.3g}",
                   gap=tr.max_closed_form_gap)

    def gamma_limit():
        tr = ctx.once("trace", trace)
        if tr.a < 0:
            return _ok(tr.first_negative is not None and tr.first_negative == tr.first_negative_closed_form,
                       f"M = {tr.first_negative}", M=tr.first_negative,
                       M_closed_form=tr.first_negative_closed_form, tie=tr.tie)
        # a = 0: gamma_m = n q^{-m} decreases to 0
        m = len(tr.gammas) - 1
        mono = all(b < a for a, b in zip(tr.gammas, tr.gammas[1:]))
        return _ok(mono and abs(tr.gammas[-1] - p["n"] * tr.q ** (-m)) <= 1e-12,
                   f"gamma_m -> {tr.gamma_fixed_point:g}", last=tr.gammas[-1])

    def const_limit():
        # ln C_m - ln limit contracts by exactly 1/q per step
        tr = ctx.once("trace", trace)
        m = len(tr.constants) - 1
        L = math.log(tr.constant_limit)
        err = math.log(tr.constants[-1]) - L
        predicted = tr.q ** (-m) * (math.log(tr.constants[0]) - L)
        gap = abs(err - predicted)
        return _ok(gap <= 1e-10 * max(1.0, abs(L)), f"|ln C_m - ln limit| = {abs(err):.3g}",
                   limit=tr.constant_limit, last=tr.constants[-1], contraction_gap=gap)

    return [("closed-form", closed), ("gamma-limit", gamma_limit), ("constant-limit", const_limit)]


def _critical_split(ctx):
    rc, opt = ctx.rc, ctx.opt
    n, s = rc.problem["n"], rc.problem["s"]
    q = rc.problem.get("q")
    if q is None:
        qs = RegimeInput(n, s, 2.0).serrin
        q = float(qs) if qs is not None else 2.0

    def scan():
        u = power_decay_field(n, float(opt["beta"]))
        mult = _parse_list(opt["multiples"], "options.multiples")
        splits, ratios, spread = critical_split_scan(u, ctx.kernel, q, float(opt["rho"]), mult,
                                                     rc.quadrature, rc.jobs)
        ctx.csv("critical_split.csv", ["R", "J1", "J1_bound", "J2_bound", "lp_integral"],
                [(sp.R, sp.J1, sp.J1_bound, sp.J2_bound, sp.lp_integral) for sp in splits])
        return splits, ratios, spread

    def bound():
        splits, _, _ = ctx.once("scan", scan)
        return _ok(all(sp.J1_bound_holds for sp in splits), "J1 <= C R^{-2s} int_{B_rho} u",
                   J1=[sp.J1 for sp in splits])

    def scaling():
        splits, ratios, _ = ctx.once("scan", scan)
        if all(r is None for r in ratios):
            return "degenerate", "u vanishes on B_rho", {}
        target = 2.0 ** (-2.0 * s)
        tol = float(opt["tolerance"])
        return _ok(all(r is not None and abs(r / target - 1) <= tol for r in ratios),
                   f"ratios {ratios} vs {target:.6g}", ratios=ratios)

    def uniform():
        _, _, spread = ctx.once("scan", scan)
        if spread is None:
            return "degenerate", "L phi_R vanishes", {}
        return _ok(spread <= float(opt["ratio_limit"]), f"max/min = {spread:.6g}", spread=spread)

    return [("j1-bound", bound), ("j1-scaling", scaling), ("lp-uniformity", uniform)]


def _sharpness(ctx):
    rc, opt = ctx.rc, ctx.opt
    n, s, q = rc.problem["n"], rc.problem["s"], rc.problem["q"]
    exploratory = bool(opt["exploratory"])
    cfg = rc.quadrature
    if cfg == DEFAULT_CONFIG:
        cfg = SHARPNESS_CONFIG

    def report():
        radii = default_radii() if opt["radii"] is None else _parse_list(opt["radii"], "options.radii")
        scales = _parse_list(opt["weak_scales"], "options.weak_scales")
        rep = sharpness_report(n, s, q, ctx.kernel, radii, float(opt["safety"]), cfg, rc.jobs,
                               exploratory, scales)
        ctx.csv("sharpness.csv", ["r", "Lu", "uq", "margin", "budget"],
                [(r.r, r.Lu, r.uq, r.margin, r.budget) for r in rep.rows])
        ctx.data["margins"] = [(r.r, r.margin) for r in rep.rows]
        return rep

    def tag(status):
        rep = ctx.once("report", report)
        return "exploratory" if rep.exploratory and status == "pass" else status

    def calibration():
        rep = ctx.once("report", report)
        return tag("pass" if rep.profile.c > 0 else "fail"), f"c = {rep.profile.c:.9g}", {"c": rep.profile.c}

    def margins():
        rep = ctx.once("report", report)
        worst = min(r.margin + r.budget for r in rep.rows) if rep.rows else float("nan")
        return (tag("pass" if rep.certified else "fail"), f"{len(rep.rows)} radii",
                {"min_margin_plus_budget": worst})

    def scaling():
        rep = ctx.once("report", report)
        return tag("pass" if rep.scaling_gap <= 1e-9 else "fail"), f"gap {rep.scaling_gap:.3g}", {}

    def weak():
        rep = ctx.once("report", report)
        bad = [R for R, w in rep.weak if isinstance(w, Exception) or w.value < -w.error_budget]
        vals = {str(R): (str(w) if isinstance(w, Exception) else w.value) for R, w in rep.weak}
        return tag("pass" if not bad else "fail"), f"scales {[R for R, _ in rep.weak]}", vals

    return [("calibration", calibration), ("margins", margins), ("scaling-identity", scaling),
            ("weak-residual", weak)]


def _full_suite(ctx):
    rc = ctx.rc
    res = {}

    def crit(i, fn):
        def check():
            r = fn()
            res[i] = r
            return r.status, r.name, r.measured
        return check

    def lam():
        base = res[3].measured if 3 in res else None
        return suite.lambda_independence(jobs=rc.jobs, baseline=base)

    def cut():
        r = suite.cutoff_uniformity_check(jobs=rc.jobs)
        ctx.data["cutoff"] = [(n, R, a, b) for n, m in r.measured.items()
                              for R, a, b in zip(suite.CUTOFF_SCALES, m["inner"], m["outer"])]
        return r

    def dyadic():
        r = suite.dyadic_evidence()
        return r

    def iterate():
        r = suite.iteration_exactness()
        tr = iterate_exponents(RegimeInput(3, 0.5, 1.2), max_steps=200)
        ctx.data["trace"] = _trace_rows(tr)[1:]
        return r

    def sharp():
        r = suite.sharpness_demo(jobs=rc.jobs)
        ctx.data["margins"] = r.measured.get("margins", [])
        return r

    fns = [suite.symbol_oracle, suite.bubble_constancy, cut, lam, dyadic, iterate,
           suite.classification_table, lambda: suite.critical_machinery(jobs=rc.jobs), sharp,
           lambda: suite.self_adjointness(jobs=rc.jobs)]
    return [(f"criterion-{i}", crit(i, fn)) for i, fn in enumerate(fns, 1)]


RUNNERS = {
    "operator-eval": _operator_eval,
    "cutoff-verify": _cutoff_verify,
    "pairing-check": _pairing_check,
    "mass-scan": _mass_scan,
    "classify": _classify,
    "iterate": _iterate,
    "critical-split": _critical_split,
    "sharpness": _sharpness,
    "full-suite": _full_suite,
}


def run(rc):
    """Run the scenario; every declared check appears once in the report."""
    ctx = _Ctx(rc)
    report = RunReport(config=rc.echo())
    checks = RUNNERS[rc.scenario](ctx)
    assert tuple(name for name, _ in checks) == SCENARIOS[rc.scenario]
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            status, detail, measured = fn()
        except (NLLError, ArithmeticError, ValueError) as e:
            status, detail, measured = "fail", f"{type(e).__name__}: {e}", {}
        report.timings[name] = time.perf_counter() - t0
        report.checks.append({"name": name, "status": status, "detail": detail, "measured": measured})
    report.data = ctx.data
    report.artifacts = dict(ctx.artifacts)
    for key, path in emit_plot_data(report, rc.out).items():
        report.artifacts[os.path.basename(path)] = path
    path = os.path.join(rc.out, "report.json")
    report.artifacts["report.json"] = path
    with open(path, "w") as fh:
        fh.write(report.to_json())
    return report


# --------------------------------------------------------------------- argv

# flag dest -> dotted config path
_FLAG_PATHS = {
    "out": "out", "jobs": "jobs", "seed": "seed",
    "n": "problem.n", "s": "problem.s", "q": "problem.q",
    "kernel": "kernel.kind", "lam": "kernel.lam", "Lam": "kernel.Lam",
    "profile_csv": "kernel.profile_csv", "anisotropy": "kernel.anisotropy",
    "tol": "quadrature.tol", "r_in": "quadrature.r_in", "R_out": "quadrature.R_out",
    "depth": "quadrature.depth", "angular": "quadrature.angular",
}


def _parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="TOML run configuration")
    g.add_argument("--out", help="output directory (default nll-out)")
    g.add_argument("--jobs", type=int, help="worker threads for per-point evaluations")
    g.add_argument("--seed", type=int, help="seed for randomized sampling")
    g.add_argument("--n", type=int)
    g.add_argument("--s", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--kernel", choices=KERNEL_KINDS)
    g.add_argument("--lam", type=float)
    g.add_argument("--Lam", type=float)
    g.add_argument("--profile-csv", dest="profile_csv")
    g.add_argument("--anisotropy", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--r-in", dest="r_in", type=float)
    g.add_argument("--R-out", dest="R_out", type=float)
    g.add_argument("--depth", type=int)
    g.add_argument("--angular", type=int)

    p = argparse.ArgumentParser(prog="nll", parents=[common],
                                description="Numerical checks for nonlocal Lane-Emden Liouville theorems")
    p.add_argument("--version", action="version", version=f"nll {__version__} ({BACKEND} core)")
    sub = p.add_subparsers(dest="scenario", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, argument_default=argparse.SUPPRESS)

    sp = add("operator-eval", "evaluate L_K f at points")
    sp.add_argument("--field", choices=("bump", "bubble", "cosine", "power"))
    sp.add_argument("--points", help="'x1;x2;...' with comma-separated coordinates")
    sp.add_argument("--count", type=int, help="random points when --points is absent")
    sp.add_argument("--scale", type=float)
    sp.add_argument("--xi", type=float)
    sp.add_argument("--alpha", type=float)
    sp = add("cutoff-verify", "empirical cutoff constants across scales")
    sp.add_argument("--scales", help="comma-separated R values")
    add("pairing-check", "symmetry of <f, L g> for bump pairs")
    sp = add("mass-scan", "S(R), growth bound and dyadic inequality")
    sp.add_argument("--base-radius", dest="base_radius", type=float)
    sp.add_argument("--doublings", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--field", choices=("power", "bubble", "bump", "zero"))
    sp.add_argument("--beta", type=float)
    add("classify", "regime of (n, s, q)")
    sp = add("iterate", "exponent and constant recursions")
    sp.add_argument("--c0", type=float)
    sp.add_argument("--cbar", type=float)
    sp.add_argument("--max-steps", dest="max_steps", type=int)
    sp = add("critical-split", "J1 / J2 split at q = q_S")
    sp.add_argument("--rho", type=float)
    sp.add_argument("--multiples", help="comma-separated R/rho values")
    sp.add_argument("--beta", type=float)
    sp = add("sharpness", "calibrate and certify the supercritical profile")
    sp.add_argument("--safety", type=float)
    sp.add_argument("--radii", help="comma-separated radii")
    sp.add_argument("--weak-scales", dest="weak_scales")
    sp.add_argument("--exploratory", action="store_true")
    add("full-suite", "all acceptance checks")
    return p


def merge(config, flags):
    """Flags win over config values; returns a new nested dict."""
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in config.items()}
    for dest, value in flags.items():
        if dest in ("config", "scenario"):
            continue
        path = _FLAG_PATHS.get(dest, f"options.{dest}")
        head, _, tail = path.partition(".")
        if tail:
            out.setdefault(head, {})[tail] = value
        else:
            out[head] = value
    out["scenario"] = flags["scenario"]
    return out


def main(argv=None):
    args = vars(_parser().parse_args(argv))
    try:
        config = load_config(args["config"]) if "config" in args else {}
        if config.get("scenario") not in (None, args["scenario"]):
            raise ConfigError(f"config scenario {config['scenario']!r} differs from the subcommand",
                              "scenario")
        rc = build_config(merge(config, args))
        report = run(rc)
    except ConfigError as e:
        print(f"nll: config error at {e.path}: {e}", file=sys.stderr)
        return 2
    for c in report.checks:
        print(f"{c['status']:<12} {c['name']:<26} {c['detail']}")
    print(f"report: {report.artifacts['report.json']}")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
