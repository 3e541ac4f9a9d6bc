"""Reference values computed without the package's quadrature."""
import math

import numpy as np
from scipy import integrate, special


def fractional_constant(n, s):
    return s * 4.0**s * math.gamma(n / 2 + s) / (math.pi ** (n / 2) * math.gamma(1.0 - s))


def fine_grid_symbol(s, xi, order=20, width=0.25, Z=4000.0, levels=60):
    """(-Delta)^s cos(xi x) at 0 in 1D on a fixed fine Gauss-Legendre grid.

    2 c int_0^inf (1 - cos(xi z)) z^{-1-2s} dz: dyadic panels on (0, 1],
    uniform panels of the given width on [1, Z], and the large-z tail by one
    integration by parts.
    """
    c = fractional_constant(1, s)
    x, w = np.polynomial.legendre.leggauss(order)

    def f(z):
        # 1 - cos written without cancellation at small z
        return 2.0 * np.sin(0.5 * xi * z) ** 2 * z ** (-1.0 - 2.0 * s)

    total = 0.0
    for j in range(levels):
        a, b = 2.0 ** -(j + 1), 2.0**-j
        z = 0.5 * (a + b) + 0.5 * (b - a) * x
        total += 0.5 * (b - a) * (w @ f(z))
    eps = 2.0**-levels
    total += xi**2 * eps ** (2 - 2 * s) / (2 * (2 - 2 * s))
    edges = np.arange(1.0, Z + width / 2, width)
    lo, hi = edges[:-1], edges[1:]
    z = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]
    total += float((0.5 * (hi - lo)[:, None] * w[None, :] * f(z)).sum())
    total += Z ** (-2 * s) / (2 * s) + math.sin(xi * Z) * Z ** (-1 - 2 * s) / xi
    return 2.0 * c * total


def bubble_constant(n, s):
    """(-Delta)^s (1+|x|^2)^{-(n-2s)/2} = C (1+|x|^2)^{-(n+2s)/2}."""
    return 4.0**s * special.gamma((n + 2 * s) / 2) / special.gamma((n - 2 * s) / 2)


def power_mass_1d(e, R):
    """int_{-R}^{R} (1 + |x|)^{-e} dx."""
    if e == 1:
        return 2.0 * math.log1p(R)
    return 2.0 * (1.0 - (1.0 + R) ** (1.0 - e)) / (e - 1.0)


def operator_1d(u, s, x, support=None):
    """L u(x) for the 1D fractional kernel by scipy quad on the symmetrized form."""
    c = fractional_constant(1, s)

    def g(z):
        return (2 * u(x) - u(x + z) - u(x - z)) * z ** (-1 - 2 * s)

    pts = [0.0, 1e-3, 0.1, 1.0, 10.0]
    if support is not None:
        pts += [abs(x - b) for b in support] + [abs(x + b) for b in support]
    pts = sorted(set(p for p in pts if p >= 0))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b > a:
            total += integrate.quad(g, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    total += integrate.quad(g, pts[-1], np.inf, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    return c * total
