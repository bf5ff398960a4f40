import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad as scipy_quad

from radboltz.cross_section import (DEFAULT_QUAD, Form, QuadratureSpec, SingularityModel, angular_moment,
                                    beta_eval, log_angular_moments, regularized_cos_moment,
                                    regularized_cos_moments, regularized_moment, regularized_moments,
                                    sine_form_exact)
from radboltz.errors import DivergenceError, DomainError, QuadratureError
from radboltz.specfun import incomplete_beta


def mp_one_minus_cos(t, k):
    """1 - cos(t)^k without cancellation."""
    return -mpmath.expm1(k / 2 * mpmath.log1p(-mpmath.sin(t) ** 2))


def mp_even_integral(model, f):
    """Tanh-sinh quadrature of beta * f on (0, pi/4], doubled."""
    mpmath.mp.dps = 30
    s, a = mpmath.mpf(model.s), mpmath.mpf(model.amplitude)
    if model.form is Form.POWER_LAW_THETA:
        beta = lambda t: a * t ** (-1 - 2 * s)
    else:
        beta = lambda t: a * mpmath.sin(t) ** (-1 - 2 * s) * mpmath.cos(t)
    return 2 * float(mpmath.quad(lambda t: beta(t) * f(t), [0, mpmath.pi / 16, mpmath.pi / 4]))


# models ----------------------------------------------------------------------


def test_model_validation():
    with pytest.raises(DomainError):
        SingularityModel(s=1.0)
    with pytest.raises(DomainError):
        SingularityModel(s=0.0)
    with pytest.raises(DomainError):
        SingularityModel(amplitude=0.0)
    with pytest.raises(ValueError):
        SingularityModel(form="Cutoff")
    assert SingularityModel(form="PowerLawTheta").form is Form.POWER_LAW_THETA
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0)


def test_beta_examples():
    m = SingularityModel(s=0.5, form=Form.POWER_LAW_THETA)
    assert beta_eval(m, math.pi / 4) == pytest.approx((math.pi / 4) ** -2, rel=1e-15)
    sine = SingularityModel(s=0.25, form=Form.POWER_LAW_SINE)
    assert beta_eval(sine, 0.1) == pytest.approx(math.sin(0.1) ** -1.5 * math.cos(0.1), rel=1e-14)
    with pytest.raises(DomainError):
        beta_eval(m, 0.0)
    with pytest.raises(DomainError):
        beta_eval(m, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.sampled_from(list(Form)), st.floats(1e-8, math.pi / 4))
def test_beta_even_positive(s, form, theta):
    m = SingularityModel(s=s, form=form)
    assert beta_eval(m, theta) == beta_eval(m, -theta) > 0


# moments against closed forms ------------------------------------------------------


def test_moment_examples(sine_model):
    s = sine_model.s
    assert angular_moment(sine_model, 1, 0) == pytest.approx(incomplete_beta(1 - s, 1, 0.5), rel=1e-12)
    assert angular_moment(sine_model, 3, 2) == pytest.approx(incomplete_beta(3 - s, 3, 0.5), rel=1e-12)
    with pytest.raises(DivergenceError):
        angular_moment(sine_model, 0, 2)


@pytest.mark.parametrize("s", [0.05, 0.25, 0.5, 0.75, 0.95])
def test_moments_match_incomplete_beta(s):
    m = SingularityModel(s=s)
    n = np.arange(1, 31)
    got = np.exp(log_angular_moments(m, n, np.arange(31)))
    ref = np.array([[incomplete_beta(a - s, b + 1.0, 0.5) for b in range(31)] for a in n])
    assert np.max(np.abs(got / ref - 1)) < 1e-8


def test_regularized_examples(sine_model):
    s = sine_model.s
    assert regularized_moment(sine_model, 1) == 0.0
    # 1 - (1-t)^2 - t^2 = 2t - 2t^2 under t = sin^2
    expected = 2 * incomplete_beta(1 - s, 1, 0.5) - 2 * incomplete_beta(2 - s, 1, 0.5)
    assert regularized_moment(sine_model, 2) == pytest.approx(expected, rel=1e-12)
    assert regularized_cos_moment(sine_model, 1) == pytest.approx(incomplete_beta(1 - s, 1, 0.5), rel=1e-12)


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9, 0.99])
def test_regularized_match_closed_forms(s):
    m = SingularityModel(s=s)
    n = np.arange(1, 65)
    lam = regularized_moments(m, n)
    cos = regularized_cos_moments(m, n)
    for k in n:
        assert cos[k - 1] == pytest.approx(sine_form_exact(m, "regularized_cos", k), rel=1e-10)
        if k > 1:
            assert lam[k - 1] == pytest.approx(sine_form_exact(m, "regularized", k), rel=1e-10)


@pytest.mark.parametrize("form", list(Form))
def test_lambda2_zero_both_forms(form):
    m = SingularityModel(s=0.5, form=form)
    assert regularized_moment(m, 1) == 0.0
    assert regularized_moments(m, [1, 2])[0] == 0.0


def test_monotone_in_n(theta_model, sine_model):
    for m in (theta_model, sine_model):
        cos = regularized_cos_moments(m, np.arange(1, 51))
        assert np.all(np.diff(cos) > 0)
        lam = regularized_moments(m, np.arange(2, 51))
        assert np.all(np.diff(lam) > 0)


# second integrator ----------------------------------------------------------------


def test_theta_form_against_tanh_sinh(theta_model):
    ref = mp_even_integral(theta_model, lambda t: mpmath.sin(t) ** 4 * mpmath.cos(t) ** 2)
    assert angular_moment(theta_model, 2, 1) == pytest.approx(ref, rel=1e-10)
    ref = mp_even_integral(theta_model, lambda t: mp_one_minus_cos(t, 4))
    assert regularized_cos_moment(theta_model, 2) == pytest.approx(ref, rel=1e-10)
    ref = mp_even_integral(theta_model, lambda t: mp_one_minus_cos(t, 10) - mpmath.sin(t) ** 10)
    assert regularized_moment(theta_model, 5) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("s", [0.2, 0.8])
def test_sine_form_against_tanh_sinh(s):
    m = SingularityModel(s=s)
    ref = mp_even_integral(m, lambda t: mp_one_minus_cos(t, 6) - mpmath.sin(t) ** 6)
    assert regularized_moment(m, 3) == pytest.approx(ref, rel=1e-10)


def test_evenness_full_interval(theta_model):
    # integrate over the full interval with the singular point as a breakpoint
    f = lambda t: abs(t) ** -2.0 * (1 - math.cos(t) ** 4 - math.sin(t) ** 4)
    full, _ = scipy_quad(f, -math.pi / 4, math.pi / 4, points=[0.0], epsabs=1e-13, epsrel=1e-13, limit=200)
    assert regularized_moment(theta_model, 2) == pytest.approx(full, rel=1e-10)


def test_amplitude_scales_linearly():
    a = regularized_moment(SingularityModel(s=0.3, amplitude=2.5), 7)
    b = regularized_moment(SingularityModel(s=0.3, amplitude=1.0), 7)
    assert a == pytest.approx(2.5 * b, rel=1e-13)


def test_quadrature_failure_reports_index():
    tight = QuadratureSpec(abs_tol=1e-30, rel_tol=1e-30, max_subdivisions=64)
    with pytest.raises(QuadratureError) as info:
        regularized_moments(SingularityModel(s=0.5), [2, 3], tight)
    assert info.value.index is not None


@settings(max_examples=15, deadline=None)
@given(st.floats(0.02, 0.98), st.integers(2, 40))
def test_regularized_between_bounds(s, n):
    # 0 < 1 - cos^{2n} - sin^{2n} < 1 - cos^{2n} pointwise
    m = SingularityModel(s=s, form=Form.POWER_LAW_THETA)
    lam = regularized_moment(m, n)
    assert 0 < lam < regularized_cos_moment(m, n)
