import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nll.errors import KmaxTooSmallError, PreconditionError, TailSpaceError
from nll.fields import (ScalarField, bump_field, constant_field, power_decay_field, quadratic_field,
                        zero_field)
from nll.kernels import KernelParams
from nll.mass_analysis import (MassProfile, ball_integral, exponents, mass, mass_profile,
                               tail_functional, verify_dyadic_inequality, verify_growth_bound)

import oracles


@pytest.mark.parametrize("R", [0.5, 1.0, 7.0, 1000.0])
@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_mass_power_1d(R, q):
    u = power_decay_field(1, 2.0)
    assert mass(u, q, R) == pytest.approx(oracles.power_mass_1d(2.0 * q, R), rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mass_constant_is_ball_volume(n):
    R = 3.0
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * R**n
    assert mass(constant_field(n, 2.0), 2.0, R) == pytest.approx(4.0 * vol, rel=1e-10)


def test_mass_off_center_bump_2d():
    # the support B_2((3, 0)) misses B_1 and lies inside B_5
    u = bump_field(2, 1.0, [3.0, 0.0])
    inner = mass(u, 2.0, 0.9)
    assert inner == 0.0
    full = mass(u, 2.0, 5.0)
    assert math.pi < full < 4 * math.pi


def test_mass_requires_q_above_one():
    with pytest.raises(PreconditionError):
        mass(constant_field(1), 1.0, 2.0)


def test_negative_field_rejected():
    with pytest.raises(PreconditionError):
        mass(constant_field(1, -1.0), 2.0, 1.0)


def test_tail_functional_constant():
    # int (1 + |x|)^{-2} over the line is 2
    assert tail_functional(constant_field(1), KernelParams(1, 0.5), R_out=1e6) == pytest.approx(2.0, rel=1e-5)


def test_tail_functional_slow_decay():
    # int (1 + |x|)^{-1/6 - 3/2} over the line is 2 / (2/3) = 3
    u = power_decay_field(1, 1.0 / 6.0)
    v = tail_functional(u, KernelParams(1, 0.25), R_out=1e3)
    assert v == pytest.approx(3.0, rel=1e-9)


def test_tail_functional_compact_support_needs_no_decay():
    u = bump_field(1, 1.0)
    assert tail_functional(u, KernelParams(1, 0.5)) > 0


def test_tail_space_violation():
    with pytest.raises(TailSpaceError):
        tail_functional(quadratic_field(1), KernelParams(1, 0.75))


def test_mass_profile_monotone():
    prof = mass_profile(power_decay_field(1, 1.0), 2.0, [8, 1, 2, 4], KernelParams(1, 0.25))
    assert prof.radii == [1.0, 2.0, 4.0, 8.0]
    prof.check()
    assert math.isfinite(prof.tail_value)
    with pytest.raises(AssertionError):
        MassProfile(2.0, [1, 2], [2.0, 1.0]).check()


def test_growth_bound_bounded_field():
    prof = mass_profile(power_decay_field(1, 2.0), 1.5, [1, 2, 4, 8, 16])
    rep = verify_growth_bound(prof, 1)
    assert rep.attained_at_smallest and rep.nonincreasing
    assert rep.sup == pytest.approx(prof.masses[0], rel=1e-12)
    with pytest.raises(PreconditionError):
        verify_growth_bound(MassProfile(2.0, [0.5], [1.0]), 1)


def test_growth_bound_constant_is_flat():
    prof = mass_profile(constant_field(2), 2.0, [1, 2, 4])
    rep = verify_growth_bound(prof, 2)
    assert np.allclose(rep.normalized, math.pi, rtol=1e-10)


@given(n=st.integers(1, 3), s=st.floats(0.05, 0.95), q=st.floats(1.01, 20.0))
@settings(max_examples=100)
def test_exponents_sum_to_dimension(n, s, q):
    a, b = exponents(n, s, q)
    assert a + b == pytest.approx(n, abs=1e-12)
    assert b > 0
    if n <= 2 * s:
        assert a < 0
        return
    qs = n / (n - 2 * s)
    if q < qs * (1 - 1e-9):
        assert a < 0
    elif q > qs * (1 + 1e-9):
        assert a > 0


def test_annuli_tile_the_ball():
    u = power_decay_field(2, 1.5)
    R = 1.0
    radii = [R * 2.0**j for j in range(6)]
    shells = [mass(u, 2.0, radii[0])] + [mass(u, 2.0, b) - mass(u, 2.0, a) for a, b in zip(radii, radii[1:])]
    assert sum(shells) == pytest.approx(mass(u, 2.0, radii[-1]), rel=1e-10)


@pytest.mark.parametrize("q", [1.5, 2.0, 4.0])
def test_hoelder_step(q):
    # int_{B_R} u <= S(R)^{1/q} |B_R|^{1 - 1/q}
    u = power_decay_field(1, 0.7)
    for R in (1.0, 5.0, 40.0):
        l1 = ball_integral(u, R, 1.0)
        assert l1 <= mass(u, q, R) ** (1 / q) * (2 * R) ** (1 - 1 / q) * (1 + 1e-12)


def test_dyadic_check_evidence():
    u = power_decay_field(1, 2.0)
    radii = [2.0**j for j in range(7)]
    d = verify_dyadic_inequality(u, 1.5, KernelParams(1, 0.25), radii)
    assert d.status == "ok"
    assert all(r is not None and r > 0 for r in d.ratios)
    assert d.a + d.b == pytest.approx(1.0)
    assert all(rem <= 0.1 * p for rem, p in zip(d.remainders, d.partial_sums))
    assert d.constant == max(d.ratios)


def test_dyadic_cache_reuse():
    u = power_decay_field(1, 2.0)
    cache = {}
    d1 = verify_dyadic_inequality(u, 1.5, KernelParams(1, 0.25), [1.0, 2.0], cache=cache)
    n_cached = len(cache)
    d2 = verify_dyadic_inequality(u, 1.5, KernelParams(1, 0.25), [1.0, 2.0], cache=cache)
    assert len(cache) == n_cached
    assert d1.ratios == d2.ratios


def test_dyadic_kmax_too_small():
    u = power_decay_field(1, 2.0)
    with pytest.raises(KmaxTooSmallError) as info:
        verify_dyadic_inequality(u, 1.5, KernelParams(1, 0.25), [1.0], k_max=2)
    assert info.value.remainder > 0.1 * info.value.partial


def test_dyadic_degenerate_zero():
    d = verify_dyadic_inequality(zero_field(1), 2.0, KernelParams(1, 0.25), [1.0, 2.0])
    assert d.status == "degenerate-zero"
    assert d.ratios == [None, None]
    assert d.degenerate == [1.0, 2.0]


def test_dyadic_rejects_small_radii():
    with pytest.raises(PreconditionError):
        verify_dyadic_inequality(constant_field(1), 2.0, KernelParams(1, 0.25), [0.5])


def test_mass_non_radial_field():
    # int_{-R}^{R} (1 + cos x)^2 dx = 3R + 4 sin R + sin(2R)/2
    u = ScalarField(lambda x: 1.0 + np.cos(x[..., 0]), 1, decay=(0.0, 2.0))
    R = 3.0
    exact = 2 * (1.5 * R + 2 * math.sin(R) + math.sin(2 * R) / 4)
    assert mass(u, 2.0, R) == pytest.approx(exact, rel=1e-10)
