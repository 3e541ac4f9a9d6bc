"""Direction sets and sphere measures for polar product rules (n = 1, 2, 3)."""
from functools import lru_cache
import math

import numpy as np


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n, radius=1.0):
    return sphere_area(n) / n * radius**n


@lru_cache(maxsize=32)
def _half_sphere_rule(n, angular):
    if n == 1:
        return np.array([[1.0]]), np.array([1.0])
    if n == 2:
        m = max(2, angular - angular % 2)
        theta = np.pi * np.arange(m // 2) / (m // 2)
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        return dirs, np.full(m // 2, 2.0 * np.pi / m)
    if n == 3:
        m = max(2, angular - angular % 2)
        mu, wmu = np.polynomial.legendre.leggauss(max(2, m // 2))
        phi = 2.0 * np.pi * np.arange(m // 2) / m
        mm, pp = np.meshgrid(mu, phi, indexing="ij")
        st = np.sqrt(1.0 - mm**2)
        dirs = np.column_stack([(st * np.cos(pp)).ravel(), (st * np.sin(pp)).ravel(), mm.ravel()])
        w = (wmu[:, None] * np.full(m // 2, 2.0 * np.pi / m)[None, :]).ravel()
        return dirs, w
    raise ValueError(f"quadrature supports n in {{1, 2, 3}}, got {n}")


def half_sphere_rule(n, angular):
    """Directions covering half the sphere and weights summing to |S^{n-1}|/2.

    Antipodal pairs of a symmetric full-sphere rule collapse to one node, which
    is exact for integrands that are even under z -> -z.
    """
    dirs, w = _half_sphere_rule(int(n), int(angular))
    return dirs.copy(), w.copy()


@lru_cache(maxsize=32)
def _full_sphere_rule(n, angular):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    d, w = _half_sphere_rule(n, angular)
    return np.vstack([d, -d]), np.concatenate([w, w])


def full_sphere_rule(n, angular):
    dirs, w = _full_sphere_rule(int(n), int(angular))
    return dirs.copy(), w.copy()


def sample_directions(n, count):
    """Deterministic, roughly uniform unit vectors (Fibonacci lattice for n = 3)."""
    if n == 1:
        return np.array([[1.0]]) if count <= 1 else np.array([[1.0], [-1.0]])
    if n == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        golden = np.pi * (3.0 - np.sqrt(5.0))
        phi = golden * i
        r = np.sqrt(1.0 - z**2)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError(f"unsupported dimension {n}")
