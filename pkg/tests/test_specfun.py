import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import roots_genlaguerre, roots_hermite

from radboltz.errors import DomainError
from radboltz.specfun import (BasisIndex, assoc_laguerre, hermite_psi, hermite_psi_all, incomplete_beta,
                              legendre_one_minus, legendre_p, log_gamma, maxwellian_sqrt, phi_radial,
                              phi_radial_all)


# exact oracles ---------------------------------------------------------------


def rodrigues_coefficients(l):
    """Coefficients of P_l from (1 / (2^l l!)) d^l/dx^l (x^2 - 1)^l, lowest degree first."""
    poly = [Fraction(math.comb(l, k) * (-1) ** (l - k)) if j == 2 * k else Fraction(0)
            for j in range(2 * l + 1) for k in [j // 2]]
    for _ in range(l):
        poly = [poly[j] * j for j in range(1, len(poly))]
    scale = Fraction(1, 2 ** l * math.factorial(l))
    return [c * scale for c in poly]


def eval_poly(coeffs, x):
    total = Fraction(0)
    for c in reversed(coeffs):
        total = total * x + c
    return total


def laguerre_exact(n, alpha, x):
    """Explicit sum  sum_k (-1)^k binom(n + alpha, n - k) x^k / k!  in rationals."""
    total = Fraction(0)
    for k in range(n + 1):
        binom = Fraction(1)
        for i in range(n - k):
            binom *= (n + alpha - i) / Fraction(i + 1)
        total += (-1) ** k * binom * x ** k / math.factorial(k)
    return total


# Legendre --------------------------------------------------------------------


def test_legendre_trivial():
    assert legendre_p(0, 0.3) == 1.0
    assert legendre_p(2, 1.0) == 1.0


def test_legendre_five_half():
    # P_5(x) = (63x^5 - 70x^3 + 15x) / 8
    expected = eval_poly(rodrigues_coefficients(5), Fraction(1, 2))
    assert expected == Fraction(23, 256)
    assert legendre_p(5, 0.5) == pytest.approx(float(expected), abs=1e-15)


@pytest.mark.parametrize("l", range(9))
def test_legendre_against_rodrigues(l):
    coeffs = rodrigues_coefficients(l)
    for x in np.linspace(-1, 1, 41):
        assert abs(legendre_p(l, x) - float(eval_poly(coeffs, Fraction(x)))) < 1e-12


def test_legendre_domain_and_cap():
    with pytest.raises(DomainError):
        legendre_p(3, 1.1)
    legendre_p(3, 1 + 1e-13)
    with pytest.raises(DomainError):
        legendre_p(20, 0.5, max_degree=10)
    with pytest.raises(DomainError):
        legendre_p(-1, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 200), st.floats(-1, 1))
def test_legendre_bounded(l, x):
    assert abs(legendre_p(l, x)) <= 1 + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 60), st.floats(0.05, math.pi / 4))
def test_one_minus_matches_direct(l, theta):
    assert legendre_one_minus(l, theta) == pytest.approx(1 - legendre_p(l, math.cos(theta)), abs=1e-12)


def test_one_minus_small_angle():
    # 1 - P_l(cos t) ~ l (l + 1) t^2 / 4
    for l in (1, 2, 7, 30):
        t = 1e-7
        assert legendre_one_minus(l, t) == pytest.approx(l * (l + 1) * t * t / 4, rel=1e-6)


# Laguerre --------------------------------------------------------------------


def test_laguerre_examples():
    assert assoc_laguerre(0, 0.5, 3.7) == 1.0
    assert assoc_laguerre(1, 0.5, 1.0) == pytest.approx(0.5, abs=1e-15)
    exact = laguerre_exact(4, Fraction(1, 2), Fraction(2))
    assert assoc_laguerre(4, 0.5, 2.0) == pytest.approx(float(exact), rel=1e-14)


@pytest.mark.parametrize("n", [2, 5, 9, 15])
def test_laguerre_against_explicit_sum(n):
    for x in (0.0, 0.3, 1.7, 6.25, 11.0):
        exact = float(laguerre_exact(n, Fraction(1, 2), Fraction(x)))
        assert assoc_laguerre(n, 0.5, x) == pytest.approx(exact, rel=1e-11, abs=1e-11)


def test_laguerre_domain():
    with pytest.raises(DomainError):
        assoc_laguerre(2, -1.0, 1.0)
    with pytest.raises(DomainError):
        assoc_laguerre(2, 0.5, -0.1)


# Hermite ---------------------------------------------------------------------


def hermite_psi_mp(n, x):
    mpmath.mp.dps = 50
    y = mpmath.mpf(x) / mpmath.sqrt(2)
    norm = 1 / mpmath.sqrt(2 ** n * mpmath.factorial(n) * mpmath.sqrt(mpmath.pi))
    return float(mpmath.mpf(2) ** mpmath.mpf(-0.25) * norm * mpmath.hermite(n, y) * mpmath.exp(-y * y / 2))


def test_hermite_examples():
    assert hermite_psi(0, 0.0) == pytest.approx((2 * math.pi) ** -0.25, rel=1e-15)
    assert hermite_psi(1, 0.0) == 0.0
    assert hermite_psi(3, 1.25) == pytest.approx(hermite_psi_mp(3, 1.25), rel=1e-13)


@pytest.mark.parametrize("n,x", [(10, 2.5), (40, -7.0), (320, 12.0), (500, 30.0), (500, 0.3)])
def test_hermite_high_degree(n, x):
    assert hermite_psi(n, x) == pytest.approx(hermite_psi_mp(n, x), rel=1e-9, abs=1e-300)


def test_hermite_orthonormal():
    y, w = roots_hermite(60)
    psi = hermite_psi_all(30, np.sqrt(2) * y) * 2 ** 0.25
    gram = (psi * np.exp(y * y) * w) @ psi.T
    assert np.max(np.abs(gram - np.eye(31))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 80), st.floats(-20, 20))
def test_hermite_parity(n, x):
    assert hermite_psi(n, -x) == pytest.approx((-1) ** n * hermite_psi(n, x), abs=1e-14)


# radial basis ----------------------------------------------------------------


def test_phi_zero_is_maxwellian_root():
    r = np.linspace(0, 12, 50)
    expected = (2 * math.pi) ** -0.75 * np.exp(-r * r / 4)
    np.testing.assert_allclose(phi_radial_all(0, r)[0], expected, rtol=1e-14)
    np.testing.assert_allclose(maxwellian_sqrt(r), expected, rtol=1e-15)


def test_phi_one_at_origin():
    # 2^{-1/4} sqrt(1 / Gamma(5/2)) * 3/2 * (4 pi)^{-1/2}
    expected = 2 ** -0.25 * math.sqrt(1 / math.gamma(2.5)) * 1.5 / math.sqrt(4 * math.pi)
    assert phi_radial(1, 0.0) == pytest.approx(expected, rel=1e-14)


def test_phi_orthonormal():
    x, w = roots_genlaguerre(45, 0.5)
    phi = phi_radial_all(40, np.sqrt(2 * x))
    gram = (phi * np.exp(x) * 4 * math.pi * math.sqrt(2) * w) @ phi.T
    assert np.max(np.abs(gram - np.eye(41))) < 1e-10


def test_phi_high_index_finite():
    vals = phi_radial_all(500, np.linspace(0, 70, 200))
    assert np.all(np.isfinite(vals))
    # at the origin L_n^{1/2}(0) = Gamma(n + 3/2) / (n! Gamma(3/2))
    n = np.arange(501)
    log_at_zero = 0.5 * (np.array([math.lgamma(k + 1.5) - math.lgamma(k + 1) for k in n]))
    expected = 2 ** -0.25 / math.sqrt(4 * math.pi) * np.exp(log_at_zero) / math.gamma(1.5)
    np.testing.assert_allclose(vals[:, 0], expected, rtol=1e-11)


def test_basis_index():
    assert BasisIndex(3).l == 0
    with pytest.raises(DomainError):
        BasisIndex(-1)


# gamma and beta ----------------------------------------------------------------


def test_log_gamma_examples():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
    product = math.sqrt(math.pi) * math.prod(k + 0.5 for k in range(7))
    assert log_gamma(7.5) == pytest.approx(math.log(product), rel=1e-14)
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_incomplete_beta_examples():
    assert incomplete_beta(1, 1, 0.5) == pytest.approx(0.5, rel=1e-15)
    mpmath.mp.dps = 30
    ref = mpmath.quad(lambda t: t ** 0.5 * (1 - t) ** 2, [0, 0.5])
    assert incomplete_beta(1.5, 3, 0.5) == pytest.approx(float(ref), rel=1e-13)
    with pytest.raises(DomainError):
        incomplete_beta(0, 1, 0.5)
    with pytest.raises(DomainError):
        incomplete_beta(1, 1, 1.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 60), st.floats(0.05, 60))
def test_incomplete_beta_complete(a, b):
    expected = math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))
    assert incomplete_beta(a, b, 1.0) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 1), st.floats(0, 1))
def test_incomplete_beta_monotone(a, b, x, y):
    lo, hi = sorted((x, y))
    assert incomplete_beta(a, b, lo) <= incomplete_beta(a, b, hi) * (1 + 1e-14)
