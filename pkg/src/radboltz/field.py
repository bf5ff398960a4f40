"""Radial profiles, spectral norms and the decay and smoothing certificates.

A fluctuation ``g(t, v) = sum_n b_n(t) phi_n(|v|)`` is handled through its mode
vector.  Norms are weighted l2 norms of that vector; the fractional weights use
the exact radial eigenvalue ``2n + 3/2`` of the harmonic oscillator
``-Laplacian + |v|**2 / 4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from .cascade import InitialData, ModeCoefficients, Trajectory
from .cross_section import DEFAULT_QUAD
from .errors import DomainError, NumericalError, QuadratureError
from .specfun import maxwellian_sqrt, phi_radial_all

NOISE_FLOOR = 1e-13
MONOTONE_SLACK = 1e-10
DECAY_SLACK = 1e-12
_LOG_MAX = math.log(np.finfo(float).max)


# ------------------------------------------------------------------- profiles


@dataclass(frozen=True)
class RadialProfile:
    """A radial function of ``|v|``, either sampled or given by a named formula.

    Sampled profiles are interpolated by a cubic spline and taken as 0 beyond
    the last sample.
    """

    func: Callable = field(repr=False)
    name: str = "sampled"
    params: dict = field(default_factory=dict)
    r: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    @classmethod
    def sampled(cls, r, values):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or len(r) < 4:
            raise DomainError("sampled profile needs matching 1-D arrays with at least 4 points")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise DomainError("sample radii must be nonnegative and increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("profile samples must be finite")
        spline = CubicSpline(r, values)
        r_end = r[-1]

        def f(x):
            return np.where(x <= r_end, spline(np.minimum(x, r_end)), 0.0)

        return cls(f, "sampled", {}, r, values)

    @classmethod
    def named(cls, name, **params):
        if name == "maxwellian_sqrt":
            return cls(maxwellian_sqrt, name, {})
        if name == "mode":
            n, a = int(params["n"]), float(params.get("amplitude", 1.0))
            return cls(lambda x: a * phi_radial_all(n, x)[n], name, {"n": n, "amplitude": a})
        if name == "gaussian_bump":
            c = float(params["center"])
            wd = float(params["width"])
            a = float(params.get("amplitude", 1.0))
            if not wd > 0:
                raise DomainError("gaussian_bump width must be positive")
            return cls(lambda x: a * np.exp(-0.5 * ((x - c) / wd) ** 2), name,
                       {"center": c, "width": wd, "amplitude": a})
        raise DomainError(f"unknown profile {name!r}")

    @classmethod
    def from_coefficients(cls, b):
        b = np.asarray(b, dtype=float)
        nmax = len(b) - 1
        return cls(lambda x: np.tensordot(b, phi_radial_all(nmax, x), axes=1), "modes", {"b": b.tolist()})


def _radial_rule(r_max, panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, r_max, panels + 1)
    h = np.diff(edges)
    r = (0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * h[:, None] * x).ravel()
    wr = (0.5 * h[:, None] * w).ravel()
    return r, wr * 4.0 * np.pi * r * r


def radial_quadrature(integrand, N, quad=DEFAULT_QUAD, *, r_max=None, order=20):
    """``int_0^r_max integrand(r) 4 pi r**2 dr`` on doubling composite Gauss panels.

    ``r_max`` defaults to ``sqrt(8N + 4) + 12``, past the turning point of
    ``phi_N`` by enough for its Gaussian tail to drop below 1e-30.
    """
    if r_max is None:
        r_max = math.sqrt(8 * N + 4) + 12.0
    panels = max(8, int(math.ceil(r_max)))
    prev = None
    while panels <= quad.max_subdivisions:
        r, wr = _radial_rule(r_max, panels, order)
        cur = np.asarray(integrand(r)) @ wr
        if not np.all(np.isfinite(cur)):
            raise DomainError("profile produced non-finite values")
        if prev is not None:
            diff = np.abs(cur - prev)
            if np.all(diff <= np.maximum(quad.abs_tol, quad.rel_tol * np.abs(cur))):
                return cur
        prev = cur
        panels *= 2
    raise QuadratureError(f"radial quadrature did not converge within {quad.max_subdivisions} panels")


def project_initial(g0, N, quad=DEFAULT_QUAD, *, n_perp=False):
    """Coefficients ``b_n(0) = int g0 phi_n 4 pi r^2 dr`` for ``n = 0..N``.

    With ``n_perp`` the collisional-invariant modes 0 and 1 are removed.
    """
    b = radial_quadrature(lambda r: phi_radial_all(N, r) * g0(r), N, quad)
    if n_perp:
        b = b.copy()
        b[:2] = 0.0
    return InitialData(b, f"projected {g0.name}")


def profile_norm(g, N, quad=DEFAULT_QUAD):
    """L2 norm of a radial profile against ``4 pi r^2 dr``."""
    return math.sqrt(float(radial_quadrature(lambda r: g(r) ** 2, N, quad)))


def reconstruct(b, r_grid):
    """Sampled profile ``sum_n b_n phi_n(r)`` on ``r_grid``."""
    b = np.asarray(b.b if isinstance(b, ModeCoefficients) else b, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    values = np.tensordot(b, phi_radial_all(len(b) - 1, r_grid), axes=1)
    return RadialProfile.sampled(r_grid, values) if len(r_grid) >= 4 else values


# ---------------------------------------------------------------------- norms


@dataclass(frozen=True)
class L2:
    pass


@dataclass(frozen=True)
class WeightedSemigroup:
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError("semigroup time must be nonnegative")


@dataclass(frozen=True)
class FracSobolev:
    s_over_2: float

    def __post_init__(self):
        if not 0 < self.s_over_2 < 0.5:
            raise DomainError("fractional order s/2 must lie in (0, 1/2)")


@dataclass(frozen=True)
class SemigroupFracSobolev:
    t: float
    s_over_2: float

    def __post_init__(self):
        WeightedSemigroup(self.t)
        FracSobolev(self.s_over_2)


def log_weights(kind, tables, size):
    """Logarithm of the squared-norm weight of each mode."""
    n = np.arange(size)
    out = np.zeros(size)
    if isinstance(kind, (WeightedSemigroup, SemigroupFracSobolev)):
        out += tables.lam[:size] * kind.t
    if isinstance(kind, (FracSobolev, SemigroupFracSobolev)):
        out += 2.0 * kind.s_over_2 * np.log(2.0 * n + 1.5)
    if not isinstance(kind, (L2, WeightedSemigroup, FracSobolev, SemigroupFracSobolev)):
        raise DomainError(f"unknown norm kind {kind!r}")
    return out


def log_norm_squared(b, kind, tables=None):
    b = np.asarray(b.b if isinstance(b, ModeCoefficients) else b, dtype=float)
    live = b != 0
    if not np.any(live):
        return -np.inf
    terms = 2.0 * np.log(np.abs(b[live])) + log_weights(kind, tables, len(b))[live]
    return float(logsumexp(terms))


def spectral_norm(b, kind=L2(), tables=None):
    """Weighted l2 norm of the mode vector, summed in log space."""
    if isinstance(kind, L2):
        b = np.asarray(b.b if isinstance(b, ModeCoefficients) else b, dtype=float)
        return float(np.linalg.norm(b))
    val = log_norm_squared(b, kind, tables)
    if val > _LOG_MAX:
        raise NumericalError(f"{kind} norm exceeds the floating-point range")
    return math.exp(0.5 * val)


# --------------------------------------------------------------- certificates


@dataclass
class DecayReport:
    delta: float
    g0_norm: float
    times: np.ndarray
    values: np.ndarray
    bounds: np.ndarray
    max_ratio: float
    first_violation: float | None

    @property
    def passed(self):
        return self.first_violation is None

    def records(self):
        return [
            {"time": float(t), "norm": "WeightedSemigroup", "value": float(v), "bound": float(b),
             "pass": bool(v <= b * (1 + DECAY_SLACK))}
            for t, v, b in zip(self.times, self.values, self.bounds)
        ]


def decay_certificate(traj, tables, delta, g0_norm):
    """Check ``||e^{tL/2} g(t)|| <= exp(-lambda_4 (1 - delta) t / 2) ||g0||`` on the grid."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    lam4 = tables.lam[2]
    values = np.array([spectral_norm(row, WeightedSemigroup(t), tables) for t, row in zip(traj.t, traj.b)])
    bounds = np.exp(-0.5 * lam4 * (1.0 - delta) * traj.t) * g0_norm
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(bounds > 0, values / bounds, np.where(values > 0, np.inf, 0.0))
    bad = values > bounds * (1 + DECAY_SLACK)
    first = float(traj.t[np.argmax(bad)]) if np.any(bad) else None
    return DecayReport(delta, g0_norm, traj.t, values, bounds, float(np.max(ratios)), first)


@dataclass
class MonotonicityReport:
    times: np.ndarray
    values: np.ndarray
    max_increase: float
    slack: float

    @property
    def passed(self):
        return self.max_increase <= self.slack


def lyapunov_values(traj, tables):
    return np.array([
        math.exp(min(log_norm_squared(row, WeightedSemigroup(t), tables), _LOG_MAX))
        for t, row in zip(traj.t, traj.b)
    ])


def lyapunov_monotonicity(traj, tables, *, slack=MONOTONE_SLACK):
    """Check that ``sum e^{lambda_{2n} t} b_n(t)^2`` does not increase along the grid."""
    values = lyapunov_values(traj, tables)
    scale = float(np.max(values)) if len(values) else 0.0
    inc = float(np.max(np.diff(values))) if len(values) > 1 else 0.0
    return MonotonicityReport(traj.t, values, max(inc, 0.0), slack * scale)


def gelfand_shilov_diagnostic(b, tables=None, *, s=None, floor=NOISE_FLOOR):
    """Fit ``log|b_n| = c0 - c (2n + 3/2)**s``; returns ``(c, rms residual)``.

    Coefficients below ``floor * max|b_n|`` are left out.  A positive rate is
    the coefficient-decay witness of Gelfand-Shilov smoothing.
    """
    b = np.asarray(b.b if isinstance(b, ModeCoefficients) else b, dtype=float)
    if s is None:
        s = tables.model.s
    mags = np.abs(b)
    top = mags.max() if len(mags) else 0.0
    n = np.flatnonzero(mags > floor * top) if top > 0 else np.zeros(0, dtype=int)
    if len(n) < 4:
        raise DomainError(f"need at least 4 coefficients above the noise floor, have {len(n)}")
    x = (2.0 * n + 1.5) ** s
    coeffs, res, *_ = np.polyfit(x, np.log(mags[n]), 1, full=True)
    rms = math.sqrt(float(res[0]) / len(n)) if len(res) else 0.0
    return float(-coeffs[0]), rms


def sharpness_exponents(tables, r, c, t):
    """``c (2n + 3/2)**r t - lambda_{2n} t`` for every mode.

    For single-mode data at mode n this is the log of
    ``||e^{c t H^r} g(t)|| / |b_n(0)|``; it grows without bound in n when r > s.
    """
    n = np.arange(tables.N + 1)
    return c * (2.0 * n + 1.5) ** r * t - tables.lam * t
