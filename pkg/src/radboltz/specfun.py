"""Special functions and the radial eigenbasis.

Everything here is computed from three-term recurrences on *normalized*
functions, with normalization constants taken from log-gamma, so that indices
in the hundreds neither overflow nor underflow.  The Gaussian factor is carried
as a separate logarithmic scale and applied only at the end.

Conventions
-----------
``hermite_psi(n, x)`` is the rescaled Hermite function
``2**-0.25 * phi_n(x / sqrt(2))`` where ``phi_n`` are the standard
orthonormal Hermite functions, so ``psi_n`` is orthonormal on the line and
``psi_0(x) = (2 pi)**-0.25 * exp(-x**2 / 4)``.

``phi_radial(n, r)`` is the radial (l = m = 0) member of the 3D
Laguerre-Gauss basis::

    phi_n(v) = 2**-0.25 * sqrt(n! / Gamma(n + 3/2)) * L_n^{(1/2)}(|v|**2 / 2)
               * exp(-|v|**2 / 4) * (4 pi)**-0.5

orthonormal in L2(R^3), i.e. under the radial measure ``4 pi r**2 dr``.
The magnetic index m of the general basis never enters a radial computation
and is not represented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

LEGENDRE_MAX_DEGREE = 10_000
LAGUERRE_MAX_DEGREE = 10_000
HERMITE_MAX_DEGREE = 10_000

# rescale the recurrence state once it leaves [1/_BIG, _BIG]
_BIG = 1e150
_LOG_BIG = np.log(_BIG)


@dataclass(frozen=True)
class BasisIndex:
    """Index of a basis function: radial quantum number ``n`` and degree ``l``."""

    n: int
    l: int = 0

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise DomainError(f"basis indices must be nonnegative, got {self}")


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _check_degree(n, cap, name):
    if int(n) != n or n < 0:
        raise DomainError(f"{name} degree must be a nonnegative integer, got {n}")
    if n > cap:
        raise DomainError(f"{name} degree {n} exceeds configured maximum {cap}")
    return int(n)


def legendre_p(l, x, *, max_degree=LEGENDRE_MAX_DEGREE):
    """Legendre polynomial ``P_l(x)`` on ``[-1, 1]`` by Bonnet's recurrence."""
    l = _check_degree(l, max_degree, "Legendre")
    x, scalar = _as_array(x)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise DomainError("legendre_p requires |x| <= 1")
    p_prev = np.ones_like(x)
    if l == 0:
        return float(p_prev) if scalar else p_prev
    p = x.copy()
    for k in range(1, l):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return float(p) if scalar else p


def legendre_one_minus(l, theta):
    """``1 - P_l(cos theta)`` without cancellation for small ``theta``.

    Runs the Legendre recurrence on ``D_l = 1 - P_l`` with ``1 - cos theta``
    written as ``2 sin^2(theta/2)``.
    """
    l = _check_degree(l, LEGENDRE_MAX_DEGREE, "Legendre")
    theta, scalar = _as_array(theta)
    one_minus_x = 2.0 * np.sin(0.5 * theta) ** 2
    x = np.cos(theta)
    d_prev = np.zeros_like(theta)
    if l == 0:
        return float(d_prev) if scalar else d_prev
    d = one_minus_x
    for k in range(1, l):
        d_prev, d = d, ((2 * k + 1) * (one_minus_x + x * d) - k * d_prev) / (k + 1)
    return float(d) if scalar else d


def assoc_laguerre(n, alpha, x, *, max_degree=LAGUERRE_MAX_DEGREE):
    """Generalized Laguerre polynomial ``L_n^{(alpha)}(x)`` for ``x >= 0``."""
    n = _check_degree(n, max_degree, "Laguerre")
    if not alpha > -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {alpha}")
    x, scalar = _as_array(x)
    if np.any(x < 0):
        raise DomainError("assoc_laguerre requires x >= 0")
    l_prev = np.ones_like(x)
    if n == 0:
        return float(l_prev) if scalar else l_prev
    l_cur = 1.0 + alpha - x
    for k in range(1, n):
        l_prev, l_cur = l_cur, ((2 * k + 1 + alpha - x) * l_cur - (k + alpha) * l_prev) / (k + 1)
    return float(l_cur) if scalar else l_cur


def _rescale(p_prev, p, log_scale):
    big = np.abs(p) > _BIG
    if np.any(big):
        p_prev = np.where(big, p_prev / _BIG, p_prev)
        p = np.where(big, p / _BIG, p)
        log_scale = log_scale + np.where(big, _LOG_BIG, 0.0)
    return p_prev, p, log_scale


def hermite_psi_all(nmax, x):
    """Rows ``psi_0 .. psi_nmax`` evaluated at ``x``; shape ``(nmax + 1,) + x.shape``."""
    nmax = _check_degree(nmax, HERMITE_MAX_DEGREE, "Hermite")
    x, _ = _as_array(x)
    y = x / np.sqrt(2.0)
    gauss_log = -0.5 * y * y
    out = np.empty((nmax + 1,) + x.shape)
    # normalized recurrence for phi_n(y) with the Gaussian stripped off
    log_scale = np.zeros_like(y)
    p_prev = np.zeros_like(y)
    p = np.full_like(y, np.pi ** -0.25)
    for k in range(nmax + 1):
        out[k] = p * np.exp(log_scale + gauss_log)
        p_next = np.sqrt(2.0 / (k + 1)) * y * p - np.sqrt(k / (k + 1)) * p_prev
        p_prev, p, log_scale = _rescale(p, p_next, log_scale)
    return out * 2.0 ** -0.25


def hermite_psi(n, x):
    """Rescaled Hermite function ``psi_n(x) = 2**-0.25 phi_n(x / sqrt 2)``."""
    x_arr, scalar = _as_array(x)
    val = hermite_psi_all(n, x_arr)[-1]
    return float(val) if scalar else val


def _laguerre_functions(nmax, alpha, x):
    """Normalized ``sqrt(n!/Gamma(n+alpha+1)) L_n^alpha(x) exp(-x/2)`` for n <= nmax."""
    out = np.empty((nmax + 1,) + x.shape)
    log_scale = np.full_like(x, -0.5 * special.gammaln(alpha + 1.0))
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    for k in range(nmax + 1):
        out[k] = p * np.exp(log_scale - 0.5 * x)
        a = (2 * k + 1 + alpha - x) / np.sqrt((k + 1) * (k + 1 + alpha))
        b = np.sqrt(k * (k + alpha) / ((k + 1) * (k + 1 + alpha)))
        p_prev, p, log_scale = _rescale(p, a * p - b * p_prev, log_scale)
    return out


_PHI_PREFACTOR = 2.0 ** -0.25 / np.sqrt(4.0 * np.pi)


def phi_radial_all(nmax, r):
    """Rows ``phi_0 .. phi_nmax`` of the radial basis at radii ``r``."""
    nmax = _check_degree(nmax, LAGUERRE_MAX_DEGREE, "Laguerre")
    r, _ = _as_array(r)
    if np.any(r < 0):
        raise DomainError("radial coordinate must be nonnegative")
    return _PHI_PREFACTOR * _laguerre_functions(nmax, 0.5, 0.5 * r * r)


def phi_radial(n, r):
    """Radial basis function ``phi_{n,0,0}`` evaluated at ``|v| = r``."""
    r_arr, scalar = _as_array(r)
    val = phi_radial_all(n, r_arr)[-1]
    return float(val) if scalar else val


def maxwellian_sqrt(r):
    """``mu_3(v)**0.5 = (2 pi)**-0.75 exp(-|v|**2 / 4)``, which equals ``phi_0``."""
    r = np.asarray(r, dtype=float)
    return (2.0 * np.pi) ** -0.75 * np.exp(-0.25 * r * r)


def log_gamma(x):
    """``ln Gamma(x)`` for ``x > 0``."""
    x_arr, scalar = _as_array(x)
    if np.any(~(x_arr > 0)):
        raise DomainError("log_gamma requires x > 0")
    val = special.gammaln(x_arr)
    return float(val) if scalar else val


def log_binomial(n, k):
    """``ln C(n, k)`` through log-gamma."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def incomplete_beta(a, b, x):
    """Unnormalized incomplete beta integral ``int_0^x t**(a-1) (1-t)**(b-1) dt``."""
    a_arr, sa = _as_array(a)
    b_arr, sb = _as_array(b)
    x_arr, sx = _as_array(x)
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise DomainError("incomplete_beta requires a, b > 0")
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise DomainError("incomplete_beta requires 0 <= x <= 1")
    with np.errstate(divide="ignore"):
        log_reg = np.log(special.betainc(a_arr, b_arr, x_arr))
    val = np.exp(log_reg + special.betaln(a_arr, b_arr))
    return float(val) if (sa and sb and sx) else val
