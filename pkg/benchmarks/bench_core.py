"""Compiled core versus the numpy fallback.

    python benchmarks/bench_core.py [--repeat N]

Times the two core kernels directly, then one end-to-end workload (the
cutoff operator on a grid of points) under each backend in a subprocess,
since the backend is fixed at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nll import _core_py
from nll.geometry import half_sphere_rule

try:
    from nll import _core
except ImportError:
    _core = None

END_TO_END = """
import time
import numpy as np
from nll import BACKEND
from nll.kernels import fractional_kernel
from nll.operator import CutoffFamily, make_bump, operator_values
k = fractional_kernel(2, 0.5)
phi = CutoffFamily(make_bump(2)).at(2.0).phi
pts = np.column_stack([np.linspace(0.0, 3.9, 40), np.zeros(40)])
t0 = time.perf_counter()
operator_values(k, phi, pts)
print(BACKEND, time.perf_counter() - t0)
"""


def _inputs(n=2, nr=225, ndir=32):
    rng = np.random.default_rng(0)
    dirs, _ = half_sphere_rule(n, 2 * ndir)
    dirs = np.ascontiguousarray(dirs)
    radii = np.geomspace(1e-3, 10.0, nr)
    kw = np.ascontiguousarray(rng.uniform(size=(nr, dirs.shape[0])))
    return (_core_py.BUMP_SQ, np.array([1.0]), np.zeros(n), np.array([0.3, 0.1]), radii, dirs, kw)


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=20, repeat=repeat)) / 20


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled core not built; run `python setup.py build_ext --inplace`")
        return 1

    rows = []
    a = _inputs()
    r = np.geomspace(1e-3, 10.0, 10_000)
    p = np.array([1.0, 0.4])
    for label, mod in (("compiled", _core), ("python", _core_py)):
        t_sym = _best(lambda: mod.sym_diff_weighted(*a), args.repeat)
        t_rad = _best(lambda: mod.radial_profile(_core_py.POWER, p, r), args.repeat)
        rows.append((label, t_sym, t_rad))
    print(f"{'backend':<10}{'sym_diff (us)':>16}{'radial (us)':>14}")
    for label, t_sym, t_rad in rows:
        print(f"{label:<10}{t_sym * 1e6:>16.1f}{t_rad * 1e6:>14.1f}")
    print(f"{'speedup':<10}{rows[1][1] / rows[0][1]:>15.1f}x{rows[1][2] / rows[0][2]:>13.1f}x")

    print("\nend to end: 40 evaluations of L phi_2 in 2D")
    for flag in ("0", "1"):
        env = dict(os.environ, NLL_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                             capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"{name:<10}{float(secs):>10.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
