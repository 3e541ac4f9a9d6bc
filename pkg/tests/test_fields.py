import numpy as np
import pytest

from nll import _backend
from nll.errors import DomainError, ParameterDomainError
from nll.fields import (ScalarField, bubble_field, bump_field, constant_field, cosine_field,
                        fractional_bubble, power_decay_field, zero_field)


def test_bump_plateau_and_support():
    b = bump_field(1, 2.0)
    x = np.array([[0.0], [1.9], [3.0], [4.0], [5.0]])
    v = b(x)
    assert v[0] == 1.0 and v[1] == 1.0
    assert 0.0 < v[2] < 1.0
    assert v[3] == 0.0 and v[4] == 0.0
    assert b.support_radius == 4.0


def test_bump_is_monotone_smooth_step():
    b = bump_field(1, 1.0)
    r = np.linspace(1.0, 2.0, 201)[:, None]
    v = b(r)
    assert np.all(np.diff(v) <= 0)
    # symmetric transition: eta(1.5) = 1/2
    assert b(np.array([1.5])) == pytest.approx(0.5)


def test_squared_bump():
    b, b2 = bump_field(2, 1.0), bump_field(2, 1.0, squared=True)
    x = np.array([[1.3, 0.2], [0.0, 1.7]])
    assert np.allclose(b2(x), b(x) ** 2)


def test_center_shift():
    b = bump_field(2, 1.0, center=[3.0, 0.0])
    assert b(np.array([3.0, 0.0])) == 1.0
    assert b(np.array([0.0, 0.0])) == 0.0
    with pytest.raises(ParameterDomainError):
        bump_field(2, 1.0, center=[1.0])


def test_power_and_bubble_values():
    u = power_decay_field(1, 2.0, 3.0)
    assert u(np.array([1.0])) == pytest.approx(3.0 / 4.0)
    v = bubble_field(2, 0.5)
    assert v(np.array([3.0, 4.0])) == pytest.approx(26**-0.5)


def test_fractional_bubble_requires_n_gt_2s():
    with pytest.raises(ParameterDomainError):
        fractional_bubble(1, 0.75)


def test_decay_metadata_holds_on_samples():
    pts = np.random.default_rng(1).normal(scale=20, size=(200, 2))
    for f in (power_decay_field(2, 1.5), bubble_field(2, 1.0), constant_field(2, -2.0),
              cosine_field([1.0, 2.0])):
        f.check_metadata(pts)


def test_check_metadata_catches_false_support():
    f = ScalarField(lambda x: np.ones(np.shape(x)[:-1]), 1, support_radius=1.0)
    with pytest.raises(DomainError):
        f.check_metadata(np.array([[2.0]]))


def test_scaled_keeps_metadata():
    u = power_decay_field(1, 2.0)
    v = u.scaled(0.5)
    assert v.decay == (2.0, 0.5)
    assert v(np.array([0.0])) == 0.5
    assert v.radial.amplitude == 0.5


def test_zero_field():
    assert zero_field(3)(np.array([1.0, 2.0, 3.0])) == 0.0


def test_bad_smoothness_tag():
    with pytest.raises(ParameterDomainError):
        ScalarField(lambda x: x, 1, smoothness="C17")


def test_backends_agree_on_profiles():
    from nll import _core_py
    r = np.linspace(0.0, 5.0, 101)
    for code, params in [(_backend.BUMP, (1.5,)), (_backend.BUMP_SQ, (0.7,)), (_backend.POWER, (2.0, 1.3)),
                         (_backend.BUBBLE, (1.0, 0.75)), (_backend.CONST, (4.0,))]:
        a = np.asarray(_backend.core.radial_profile(code, np.asarray(params, dtype=float), r))
        b = _core_py.radial_profile(code, np.asarray(params, dtype=float), r)
        assert np.allclose(a, b, rtol=1e-14, atol=0)
