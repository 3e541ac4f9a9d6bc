import math

import numpy as np
import pytest

from nll.errors import CalibrationImpossible, ParameterDomainError, PreconditionError, RegimeError
from nll.kernels import KernelParams, fractional_constant, fractional_kernel, make_anisotropic_kernel
from nll.sharpness import (BaseValues, SharpnessProfile, base_values, calibrate_c, calibrate_from,
                           default_radii, is_fractional, pointwise_margin, scaling_gap, sharpness_report)


@pytest.mark.parametrize("q", [1.2, 1.5, 2.0])
def test_profile_needs_supercritical(q):
    # q_S = 2 for n=1, s=1/4
    with pytest.raises(RegimeError):
        SharpnessProfile(1, 0.25, q)
    with pytest.raises(RegimeError):
        SharpnessProfile(1, 0.75, 5.0)


def test_profile_fields():
    p = SharpnessProfile(1, 0.25, 4.0, c=0.5)
    assert p.alpha == pytest.approx(1 / 6)
    assert p.field([0.0]) == 0.5
    assert p.field([1.0]) == pytest.approx(0.5 * 2 ** (-1 / 6))
    with pytest.raises(ParameterDomainError):
        SharpnessProfile(1, 0.25, 4.0, c=0.0)


def test_default_radii():
    r = default_radii()
    assert len(r) == 25 and r[0] == 0.0
    assert r[1] == pytest.approx(0.1) and r[-1] == pytest.approx(100.0)


def test_is_fractional():
    k = fractional_kernel(1, 0.25)
    assert is_fractional(k)
    # declared bounds do not change the kernel function
    assert is_fractional(k.with_bounds(lam=1e-3))
    c = fractional_constant(2, 0.5)
    aniso = make_anisotropic_kernel(KernelParams(2, 0.5, 0.5 * c, 1.5 * c),
                                    lambda d: c * (1 + 0.5 * d[:, 0] ** 2 - 0.25))
    assert not is_fractional(aniso)


@pytest.mark.parametrize("q", [3.0, 4.0])
def test_single_radius_margin_formula(q):
    # with one radius and safety t, c = t (L/u0^q)^{1/(q-1)} and margin = (1 - t^{q-1}) c L
    k = fractional_kernel(1, 0.25)
    tmpl = SharpnessProfile(1, 0.25, q)
    base = base_values(tmpl, k, [1.0])
    c = calibrate_from(base, q, 0.5)
    (row,) = pointwise_margin(tmpl.with_c(c), k, [1.0])
    expected = (1 - 0.5 ** (q - 1)) * c * base.L[0]
    assert row.margin == pytest.approx(expected, rel=1e-9)
    assert row.certified


def test_calibration_monotone_in_safety():
    base = BaseValues([0.0, 1.0], [1.0, 0.5], [1.0, 0.25], [0.0, 0.0])
    cs = [calibrate_from(base, 3.0, t) for t in (0.1, 0.5, 0.9)]
    assert cs == sorted(cs)
    assert cs[-1] == pytest.approx(0.9 * 1.0)
    with pytest.raises(ParameterDomainError):
        calibrate_from(base, 3.0, 1.0)


def test_calibration_impossible():
    base = BaseValues([0.0, 2.0], [1.0, -0.1], [1.0, 0.5], [0.0, 0.0])
    with pytest.raises(CalibrationImpossible) as info:
        calibrate_from(base, 3.0, 0.9)
    assert info.value.radius == 2.0


def test_scaling_gap_identity():
    base = BaseValues([0.0], [2.0], [1.0], [0.0])

    class Row:
        Lu, margin = 1.0, 1.0 - 0.5**3

    assert scaling_gap(base, [Row()], 0.5, 3.0) == 0.0


def test_kernel_preconditions():
    tmpl = SharpnessProfile(1, 0.25, 4.0)
    with pytest.raises(PreconditionError):
        pointwise_margin(tmpl, fractional_kernel(1, 0.5), [0.0])
    with pytest.raises(PreconditionError):
        pointwise_margin(tmpl, fractional_kernel(1, 0.25), [-1.0])


def test_exploratory_kernel_flagged():
    # s < 1/2 keeps L u finite at the kink of the profile at the origin
    n, s = 2, 0.25
    c = fractional_constant(n, s)
    k = make_anisotropic_kernel(KernelParams(n, s, 0.7 * c, 1.3 * c),
                                lambda d: c * (1 + 0.3 * (2 * d[:, 0] ** 2 - 1)))
    tmpl = SharpnessProfile(n, s, 4.0)
    with pytest.raises(PreconditionError):
        pointwise_margin(tmpl, k, [0.0])
    rows = pointwise_margin(tmpl, k, [0.0, 1.0], exploratory=True)
    assert len(rows) == 2
    assert all("exploratory" in r.flags for r in rows)


def test_calibrate_c_positive():
    k = fractional_kernel(1, 0.25)
    c = calibrate_c(SharpnessProfile(1, 0.25, 4.0), k, [0.0, 1.0, 10.0])
    assert c > 0 and math.isfinite(c)


def test_report_small():
    k = fractional_kernel(1, 0.25)
    rep = sharpness_report(1, 0.25, 4.0, k, radii=[0.0, 0.5, 5.0], weak_scales=(1.0,))
    assert rep.certified
    assert rep.scaling_gap <= 1e-9
    assert len(rep.rows) == 3
    (R, w), = rep.weak
    assert R == 1.0 and w.value > -w.error_budget
    assert not rep.exploratory
    assert np.all(np.array([r.margin for r in rep.rows]) >= -np.array([r.budget for r in rep.rows]))
