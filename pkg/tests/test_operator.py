import math

import numpy as np
import pytest

from nll.errors import ParameterDomainError, PreconditionError, TailSpaceError
from nll.fields import ScalarField, bump_field, cosine_field, power_decay_field, zero_field
from nll.kernels import fractional_kernel
from nll.operator import (CutoffFamily, annulus_nodes, apply_operator, ball_nodes, cutoff_uniformity,
                          lp_norm_power, make_bump, operator_values, pairing, verify_cutoff_bound,
                          weak_supersolution_residual)

import oracles


def test_bump_dimensions():
    for n in (1, 2, 3):
        assert make_bump(n).n == n
    with pytest.raises(ParameterDomainError):
        make_bump(4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi_is_squared_rescaled_bump(n):
    eta = make_bump(n)
    R = 3.0
    phi = CutoffFamily(eta).at(R).phi
    rng = np.random.default_rng(1)
    x = rng.uniform(-7, 7, size=(200, n))
    assert np.allclose(phi.evaluate(x), eta.evaluate(x / R) ** 2, atol=1e-15)
    assert phi.support_radius == 2 * R
    assert phi(np.zeros(n)) == 1.0


def test_phi_generic_bump_path():
    # a bump without a known profile goes through the generic composition
    base = make_bump(1)
    eta = ScalarField(base.evaluate, 1, support_radius=2.0, label="plain")
    phi = CutoffFamily(eta, 2.0).phi
    x = np.linspace(-5, 5, 41)[:, None]
    assert np.allclose(phi.evaluate(x), base.evaluate(x / 2.0) ** 2)
    assert phi.support_radius == 4.0


@pytest.mark.parametrize("x", [0.0, 0.8, 1.5, 3.0])
def test_cutoff_operator_matches_scipy(x):
    s = 0.5
    phi = CutoffFamily(make_bump(1)).phi
    k = fractional_kernel(1, s)
    (res,) = apply_operator(k, phi, [[x]])
    ref = oracles.operator_1d(lambda t: float(phi([t])), s, x, support=(1.0, 2.0))
    assert res.value == pytest.approx(ref, rel=1e-5, abs=1e-8)


def test_operator_values_use_exterior_route_off_support():
    k = fractional_kernel(2, 0.5)
    phi = CutoffFamily(make_bump(2)).phi
    pts = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, -9.0]])
    vals, errs = operator_values(k, phi, pts)
    assert vals[0] > 0
    # off the support L phi = -int phi(y) K(x - y) dy < 0
    assert np.all(vals[1:] < 0)
    assert np.all(errs >= 0)


def test_apply_operator_parallel_matches_serial():
    k = fractional_kernel(1, 0.25)
    f = bump_field(1, 1.0)
    pts = np.linspace(-3, 3, 7)[:, None]
    a = [r.value for r in apply_operator(k, f, pts, jobs=1)]
    b = [r.value for r in apply_operator(k, f, pts, jobs=4)]
    assert a == b


def test_cutoff_bound_single_scale():
    k = fractional_kernel(1, 0.5)
    (rep,) = verify_cutoff_bound(k, CutoffFamily(make_bump(1)), [2.0])
    assert rep.failures == []
    assert rep.inner_constant > 0 and rep.outer_constant > 0
    assert all(r < 4.0 for r in rep.inner_radii)
    assert all(r >= 4.0 for r in rep.outer_radii)
    # far out |L phi| |x|^{1+2s} tends to c_{1,s} int phi, which is below 4 c_{1,s} R
    assert rep.outer_constant < 10


def test_cutoff_bound_rejects_small_scale():
    with pytest.raises(PreconditionError):
        verify_cutoff_bound(fractional_kernel(1, 0.5), CutoffFamily(make_bump(1)), [0.5])


def test_cutoff_uniformity_ratio():
    class R:
        def __init__(self, a, b):
            self.inner_constant, self.outer_constant = a, b

    assert cutoff_uniformity([R(1.0, 2.0), R(1.5, 2.0)]) == (1.5, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ball_nodes_volume(n):
    pts, w = ball_nodes(n, 2.0, angular=64)
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * 2.0**n
    assert w.sum() == pytest.approx(vol, rel=1e-10)
    assert np.all(np.linalg.norm(pts, axis=1) <= 2.0)


def test_annulus_nodes_volume():
    pts, w = annulus_nodes(2, 1.0, 3.0)
    assert w.sum() == pytest.approx(math.pi * 8.0, rel=1e-10)


def test_pairing_requires_compact_support():
    k = fractional_kernel(1, 0.5)
    with pytest.raises(PreconditionError):
        pairing(k, cosine_field([1.0]), bump_field(1, 1.0))
    with pytest.raises(PreconditionError):
        pairing(k, bump_field(1, 1.0, [3.0]), bump_field(1, 1.0), domain_radius=4.0)


def test_pairing_energy_is_positive():
    k = fractional_kernel(1, 0.5)
    f = bump_field(1, 0.5)
    assert pairing(k, f, f) > 0
    g0 = ScalarField(lambda x: np.zeros(np.shape(x)[:-1]), 1, support_radius=1.0)
    assert pairing(k, f, g0) == 0.0


def test_pairing_disjoint_is_negative_and_symmetric():
    k = fractional_kernel(1, 0.5)
    f, g = bump_field(1, 0.5, [0.0]), bump_field(1, 0.5, [3.0])
    fg, gf = pairing(k, f, g), pairing(k, g, f)
    assert fg < 0
    assert abs(fg - gf) <= 1e-6 * max(1.0, abs(fg))


def test_weak_residual_zero_and_errors():
    k = fractional_kernel(1, 0.5)
    fam = CutoffFamily(make_bump(1))
    res = weak_supersolution_residual(k, zero_field(1), 2.0, fam)
    assert res.value == 0.0 and res.lhs == 0.0
    with pytest.raises(PreconditionError):
        weak_supersolution_residual(k, power_decay_field(1, 2.0), 1.0, fam)
    with pytest.raises(PreconditionError):
        weak_supersolution_residual(k, power_decay_field(1, 2.0, amplitude=-1.0), 2.0, fam)
    grow = ScalarField(lambda x: np.abs(x[..., 0]) ** 2, 1, decay=(-2.0, 1.0))
    with pytest.raises(TailSpaceError):
        weak_supersolution_residual(k, grow, 2.0, fam)


def test_weak_residual_matches_direct_pairing():
    # for compactly supported u the weak form equals the pairing minus int u^q phi
    k = fractional_kernel(1, 0.5)
    u = bump_field(1, 0.5)
    fam = CutoffFamily(make_bump(1))
    res = weak_supersolution_residual(k, u, 2.0, fam)
    direct = pairing(k, u, fam.phi)
    assert res.lhs == pytest.approx(direct, rel=1e-6)
    assert res.tail_bound == 0.0


def test_lp_norm_scale_invariant_at_critical_power():
    # p = n/2s makes int |L phi_R|^p invariant under R -> 2R
    k = fractional_kernel(1, 0.25)
    fam = CutoffFamily(make_bump(1))
    v1, t1 = lp_norm_power(k, fam.at(1.0), 2.0, terms=12)
    v2, t2 = lp_norm_power(k, fam.at(2.0), 2.0, terms=12)
    assert v1 + t1 == pytest.approx(v2 + t2, rel=1e-3)
    assert t1 > 0
