import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import nll.iteration as it
from nll.errors import InternalConsistencyError, ParameterDomainError, RegimeError
from nll.fields import power_decay_field, zero_field
from nll.iteration import (CRITICAL, LOW_DIMENSION, SUBCRITICAL, SUPERCRITICAL, RegimeInput, classify,
                           critical_tail_split, exact, first_negative_closed_form, gamma_closed_form,
                           geometric_sigma, iterate_exponents, serrin_exponent)
from nll.kernels import fractional_kernel


@pytest.mark.parametrize("args, regime", [
    ((3, 0.5, 1.2), SUBCRITICAL),
    ((3, 0.5, 1.5), CRITICAL),
    ((3, 0.5, 2.0), SUPERCRITICAL),
    ((1, 0.75, 100), LOW_DIMENSION),
])
def test_truth_table(args, regime):
    rep = classify(RegimeInput(*args))
    assert rep.regime == regime
    assert (rep.trace is None) == (regime == SUPERCRITICAL)
    assert rep.narrative


def test_serrin_exponent_exact():
    assert classify(RegimeInput(3, 0.5, 1.5)).q_S == 1.5
    assert RegimeInput(2, 0.25, 2.0).serrin == Fraction(4, 3)
    assert serrin_exponent(1, 0.5) is None
    assert classify(RegimeInput(1, 0.75, 2.0)).q_S is None


def test_float_critical_exponent_is_recognised():
    # 4/3 as a float still reads as the critical exponent for n=2, s=1/4
    assert classify(RegimeInput(2, 0.25, 4 / 3), max_steps=5).regime == CRITICAL
    assert classify(RegimeInput(3, 0.5, 1.5000000001), max_steps=1).regime == SUPERCRITICAL
    assert classify(RegimeInput(3, 0.5, 1.4999999999), max_steps=5).regime == SUBCRITICAL


def test_exact_reading():
    assert exact(1 / 3) == Fraction(1, 3)
    assert exact("0.1") == Fraction(1, 10)
    assert exact(7) == Fraction(7)


@pytest.mark.parametrize("args", [(0, 0.5, 2.0), (1.5, 0.5, 2.0), (1, 0.0, 2.0), (1, 1.0, 2.0), (1, 0.5, 1.0)])
def test_input_domain(args):
    with pytest.raises(ParameterDomainError):
        RegimeInput(*args)


@given(n=st.integers(1, 6), s=st.floats(0.05, 0.95), q=st.floats(1.01, 50.0))
@settings(max_examples=200)
def test_classification_invariants(n, s, q):
    rep = classify(RegimeInput(n, s, q), max_steps=1)
    assert (rep.regime == LOW_DIMENSION) == (exact(n) <= 2 * exact(s))
    if rep.regime == SUPERCRITICAL:
        assert n > 2 * s and q > n / (n - 2 * s)
    # deterministic and representation invariant
    assert classify(RegimeInput(float(n), s, q), max_steps=1).regime == rep.regime


def test_supercritical_iteration_rejected():
    with pytest.raises(RegimeError):
        iterate_exponents(RegimeInput(3, 0.5, 2.0))


def test_iteration_step_domain():
    with pytest.raises(ParameterDomainError):
        iterate_exponents(RegimeInput(3, 0.5, 1.2), max_steps=0)
    with pytest.raises(ParameterDomainError):
        iterate_exponents(RegimeInput(3, 0.5, 1.2), Cbar=0.0)


def test_fixed_point_with_override():
    tr = iterate_exponents(RegimeInput(3, 0.5, 2.0), a_override=-1.0, max_steps=100)
    assert tr.gamma_fixed_point == -2.0
    assert tr.gammas[-1] == pytest.approx(-2.0, abs=1e-12)


def test_subcritical_first_negative():
    tr = iterate_exponents(RegimeInput(3, 0.5, 1.2))
    assert tr.a == pytest.approx(-0.5)
    assert tr.gamma_fixed_point == pytest.approx(-3.0)
    # independent count of the iterated sequence
    m = next(i for i, g in enumerate(tr.gammas) if g < 0)
    M = math.ceil(math.log((3 - (-3.0)) / 3.0) / math.log(1.2))
    assert tr.first_negative == m == M
    g_inf = tr.gamma_fixed_point
    assert all(b < a for a, b in zip(tr.gammas, tr.gammas[1:]) if a - g_inf > 1e-12)


def test_critical_trace():
    tr = iterate_exponents(RegimeInput(3, 0.5, 1.5), C0=0.5, Cbar=2.0)
    assert tr.a == 0.0 and tr.first_negative is None
    for m in (0, 1, 10, 200):
        assert tr.gammas[m] == pytest.approx(3 * (2 / 3) ** m, abs=1e-12)
    assert tr.constant_limit == pytest.approx(8.0, rel=1e-15)
    assert abs(math.log(tr.constants[-1]) - math.log(8.0)) <= 1e-10


@pytest.mark.parametrize("c0", [0.5, 1.0, 10.0])
@pytest.mark.parametrize("cbar", [0.5, 1.0, 10.0])
def test_log_constant_recursion(c0, cbar):
    q = 1.5
    tr = iterate_exponents(RegimeInput(3, 0.5, q), C0=c0, Cbar=cbar)
    logs = [math.log(c) for c in tr.constants]
    for a, b in zip(logs[:20], logs[1:21]):
        assert b == pytest.approx(a / q + math.log(cbar), abs=1e-13)
    assert abs(logs[200] - q * math.log(cbar) / (q - 1)) <= 1e-10


@given(n=st.integers(1, 3), s=st.sampled_from([0.25, 0.5, 0.75]), t=st.floats(0.1, 1.0))
@settings(max_examples=60, deadline=None)
def test_closed_form_matches(n, s, t):
    qs = serrin_exponent(n, s)
    q = 1.0 + t * (qs - 1.0) if qs else 1.0 + 10 * t
    tr = iterate_exponents(RegimeInput(n, s, q))
    assert tr.max_closed_form_gap <= 1e-12
    for m in (0, 7, 200):
        assert tr.gammas[m] == pytest.approx(gamma_closed_form(n, tr.a, q, m), abs=1e-12)


def test_tie_zone_flag():
    # n=1, s=1/2, q=2: a = -1/2, gamma_1 = 0 exactly, so the log lands on an integer
    tr = iterate_exponents(RegimeInput(1, 0.5, 2.0))
    assert tr.gammas[1] == 0.0
    assert tr.tie
    assert tr.first_negative == tr.first_negative_closed_form


def test_consistency_error_hook(monkeypatch):
    monkeypatch.setattr(it, "first_negative_closed_form", lambda n, a, q: (1, False))
    with pytest.raises(InternalConsistencyError):
        iterate_exponents(RegimeInput(3, 0.5, 1.2))


def test_closed_form_none_for_nonnegative_a():
    assert first_negative_closed_form(3, 0.0, 1.5) == (None, False)


@pytest.mark.parametrize("args", [(3, 0.5, 1.2), (3, 0.5, 1.5), (1, 0.75, 3.0), (2, 0.25, 1.1)])
def test_sigma_bound(args):
    tr = iterate_exponents(RegimeInput(*args))
    sig, bound = geometric_sigma(tr, args[1])
    assert bound == tr.sigma_bound
    assert all(x <= bound * (1 + 1e-12) for x in sig)
    assert all(tr.b - g / tr.q >= 2 * args[1] - 1e-12 for g in tr.gammas)


def test_critical_split_zero_field():
    k = fractional_kernel(1, 0.25)
    assert critical_tail_split(zero_field(1), k, 2.0, 1.0, 4.0).as_pair() == (0.0, 0.0)


def test_critical_split_preconditions():
    k = fractional_kernel(1, 0.25)
    u = power_decay_field(1, 2.0)
    with pytest.raises(RegimeError):
        critical_tail_split(u, k, 1.5, 1.0, 4.0)
    with pytest.raises(ParameterDomainError):
        critical_tail_split(u, k, 2.0, 4.0, 2.0)


def test_critical_split_bound_holds():
    k = fractional_kernel(1, 0.25)
    sp = critical_tail_split(power_decay_field(1, 2.0), k, 2.0, 1.0, 4.0)
    assert 0 < sp.J1 <= sp.J1_bound * (1 + 1e-6)
    assert sp.J1_bound_holds
    assert sp.J2_bound > 0 and math.isfinite(sp.J2_bound)
    assert 0 < sp.lq_outside < math.inf
