"""Eigenvalue and coupling tables of the radial linearized operator.

On radial functions the linearized operator is diagonal in ``phi_n`` with
eigenvalue ``lambda_{2n} = int beta (1 - cos^{2n} - sin^{2n})``, and the
quadratic part couples modes through::

    alpha_{2n,2m} = sqrt(C(2n+2m, 2n)) * Lambda_{n,m}          n >= 1
    alpha_{0,2m}  = -int beta (1 - cos^{2m})                     m >= 1, alpha_{0,0} = 0
    w_{k,l}       = alpha_{2k,2l} * sqrt((2k+2l+1) / ((2k+1)(2l+1)))

The binomial factor is never formed on its own: its logarithm is added to
``log Lambda_{n,m}`` before exponentiating.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import cross_section as cs
from .cross_section import DEFAULT_QUAD, Form, QuadratureSpec, SingularityModel
from .errors import DomainError, NumericalError, QuadratureError
from .specfun import legendre_one_minus, legendre_p, log_binomial

SNAPSHOT_VERSION = 1


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectrumTables:
    """Immutable tables up to truncation ``N``.

    ``lam[n]`` is ``lambda_{2n}``; ``alpha[n, m]`` is ``alpha_{2n,2m}`` and
    ``w[k, l]`` the coupling weight, both for ``0 <= n, m <= N``.
    ``general[n, l]`` holds ``lambda_B(n, l)`` for ``l <= lmax`` when requested.
    """

    model: SingularityModel
    N: int
    lam: np.ndarray
    alpha: np.ndarray
    w: np.ndarray
    quad: QuadratureSpec = DEFAULT_QUAD
    general: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        shape = (self.N + 1,)
        if self.lam.shape != shape or self.alpha.shape != shape * 2 or self.w.shape != shape * 2:
            raise DomainError("table shapes do not match the truncation order")

    def with_lambda(self, lam):
        """Copy with a replaced eigenvalue vector (used to exercise the checks)."""
        return SpectrumTables(self.model, self.N, _frozen(lam), self.alpha, self.w, self.quad, self.general)


def coupling_factor(k, l):
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    return np.sqrt((2 * k + 2 * l + 1) / ((2 * k + 1) * (2 * l + 1)))


def build_tables(model, N, quad=DEFAULT_QUAD, *, lmax=0):
    """Compute ``lambda``, ``alpha`` and ``w`` up to ``N`` (``N >= 2``)."""
    if int(N) != N or N < 2:
        raise DomainError(f"truncation order must be an integer >= 2, got {N}")
    N = int(N)
    idx = np.arange(N + 1)
    lam = np.zeros(N + 1)
    lam[1:] = _with_context("lambda", cs.regularized_moments, model, idx[1:], quad)
    lam[1] = 0.0

    alpha = np.zeros((N + 1, N + 1))
    alpha[0, 1:] = -_with_context("alpha_0", cs.regularized_cos_moments, model, idx[1:], quad)
    log_moments = _with_context("Lambda", cs.log_angular_moments, model, idx[1:], idx, quad)
    n, m = np.meshgrid(idx[1:], idx, indexing="ij")
    alpha[1:, :] = np.exp(log_moments + 0.5 * log_binomial(2 * n + 2 * m, 2 * n))
    if not np.all(np.isfinite(alpha)):
        raise NumericalError("coupling coefficients overflowed")

    k, l = np.meshgrid(idx, idx, indexing="ij")
    w = alpha * coupling_factor(k, l)
    general = None
    if lmax > 0:
        general = np.column_stack(
            [lam] + [eigenvalues_general(model, idx, ll, quad) for ll in range(1, lmax + 1)]
        )
        general = _frozen(general)
    return SpectrumTables(model, N, _frozen(lam), _frozen(alpha), _frozen(w), quad, general)


def _with_context(name, fn, *args):
    try:
        return fn(*args)
    except QuadratureError as exc:
        raise QuadratureError(f"{name} table: {exc}", index=exc.index) from exc


# -------------------------------------------------------- general eigenvalues


@dataclass(frozen=True)
class GeneralEigenvalue:
    n: int
    l: int
    value: float


def eigenvalues_general(model, n_values, l, quad=DEFAULT_QUAD):
    """``lambda_B(n, l)`` for several ``n`` at fixed degree ``l``.

    The integrand ``1 + delta - P_l(cos) cos^{2n+l} - P_l(sin) sin^{2n+l}`` is
    rewritten as ``D_l + P_l(cos)(1 - cos^{2n+l}) - P_l(sin) sin^{2n+l}`` with
    ``D_l = 1 - P_l(cos)``, and passed divided by ``sin^2``.
    """
    n_values = np.asarray(n_values, dtype=int)
    if np.any(n_values < 0) or l < 0:
        raise DomainError("eigenvalue indices must be nonnegative")
    k = 2.0 * n_values + l
    trivial = (n_values == 0) & (l == 0)

    def reduced(theta):
        sin_t = np.sin(theta)
        x = sin_t * sin_t
        d_over = legendre_one_minus(l, theta) / x
        p_cos = legendre_p(l, np.cos(theta))
        cos_part = d_over + p_cos * cs.one_minus_cos_power_over_sin2(k, theta)
        sin_part = legendre_p(l, sin_t) * np.exp((k[:, None] - 2.0) * np.log(sin_t))
        out = cos_part - sin_part
        out[trivial] = 0.0
        return out

    return cs.integrate_even(model, reduced, quad, mode="mixed")


def eigenvalue_general(model, n, l, quad=DEFAULT_QUAD):
    """Eigenvalue of the linearized operator on ``phi_{n,l,m}`` (independent of m)."""
    value = float(eigenvalues_general(model, [n], l, quad)[0])
    return GeneralEigenvalue(int(n), int(l), value)


# ------------------------------------------------------------ structural checks


@dataclass(frozen=True)
class ResonanceReport:
    jmax: int
    violations: list
    margin: float
    argmin: tuple

    @property
    def passed(self):
        return not self.violations and self.margin > 0


def no_resonance_check(tables, jmax):
    """Check ``lambda_{2j+2k} < lambda_{2j} + lambda_{2k}`` for ``2 <= j, k <= jmax``."""
    if jmax < 2 or 2 * jmax > tables.N:
        raise DomainError(f"need 2 <= jmax and 2 jmax <= N = {tables.N}, got jmax = {jmax}")
    lam = tables.lam
    j = np.arange(2, jmax + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    gap = lam[jj] + lam[kk] - lam[jj + kk]
    bad = np.argwhere(gap <= 0)
    violations = [(int(j[a]), int(j[b]), float(gap[a, b])) for a, b in bad]
    a, b = np.unravel_index(np.argmin(gap), gap.shape)
    return ResonanceReport(int(jmax), violations, float(gap[a, b]), (int(j[a]), int(j[b])))


def asymptotic_exponent_fit(tables, k_min, k_max):
    """Least-squares slope of ``log lambda_{2k}`` against ``log k`` on ``[k_min, k_max]``.

    ``tables`` may also be a plain eigenvalue vector indexed by ``k``.
    Returns ``(slope, rms residual)``.
    """
    lam = np.asarray(tables.lam if isinstance(tables, SpectrumTables) else tables, dtype=float)
    if not (2 <= k_min < k_max <= len(lam) - 1):
        raise DomainError(f"need 2 <= k_min < k_max <= {len(lam) - 1}")
    k = np.arange(k_min, k_max + 1)
    if len(k) < 3:
        raise DomainError("exponent fit needs at least 3 points")
    y = lam[k]
    if np.any(y <= 0):
        raise DomainError("eigenvalues must be positive on the fit range")
    coeffs, res, *_ = np.polyfit(np.log(k), np.log(y), 1, full=True)
    rms = math.sqrt(float(res[0]) / len(k)) if len(res) else 0.0
    return float(coeffs[0]), rms


@dataclass(frozen=True)
class CouplingReport:
    constant: float
    argmax: tuple
    ratios: np.ndarray


def coupling_bound_check(tables):
    """Empirical constant ``max w_{n,m} n^{3/4} / (1 + m/n)^s`` over ``n >= 1, n+m <= N``."""
    N, s = tables.N, tables.model.s
    n, m = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    live = (n >= 1) & (n + m <= N)
    ratios = np.full((N + 1, N + 1), np.nan)
    nf = n[live].astype(float)
    ratios[live] = tables.w[live] * nf ** 0.75 / (1.0 + m[live] / nf) ** s
    a, b = np.unravel_index(np.nanargmax(ratios), ratios.shape)
    return float(ratios[a, b]), CouplingReport(float(ratios[a, b]), (int(a), int(b)), ratios)


# --------------------------------------------------------------------- export


def write_csv(tables, path):
    """One row per ``(n, m)``: ``n, m, lambda_2n, alpha_2n_2m, w_n_m``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "m", "lambda_2n", "alpha_2n_2m", "w_n_m"])
        for n in range(tables.N + 1):
            for m in range(tables.N + 1):
                writer.writerow([n, m] + [f"{v:.17g}" for v in (tables.lam[n], tables.alpha[n, m], tables.w[n, m])])


def to_snapshot(tables):
    return {
        "version": SNAPSHOT_VERSION,
        "model": tables.model.as_dict(),
        "quadrature": tables.quad.as_dict(),
        "N": tables.N,
        "lambda": tables.lam.tolist(),
        "alpha": tables.alpha.tolist(),
        "w": tables.w.tolist(),
    }


def from_snapshot(data):
    if data.get("version") != SNAPSHOT_VERSION:
        raise DomainError(f"unsupported snapshot version {data.get('version')!r}")
    model = SingularityModel(**data["model"])
    quad = QuadratureSpec(**data["quadrature"])
    return SpectrumTables(model, int(data["N"]), _frozen(data["lambda"]), _frozen(data["alpha"]),
                          _frozen(data["w"]), quad)


def write_snapshot(tables, path):
    with open(path, "w") as fh:
        json.dump(to_snapshot(tables), fh, sort_keys=True, indent=1)


def read_snapshot(path):
    with open(path) as fh:
        return from_snapshot(json.load(fh))


def sine_form_tables(model, N):
    """Reference ``lambda`` and ``alpha`` for the ``PowerLawSine`` form from closed forms."""
    if model.form is not Form.POWER_LAW_SINE:
        raise DomainError("closed forms exist only for the PowerLawSine model")
    lam = np.array([0.0] + [cs.sine_form_exact(model, "regularized", n) for n in range(1, N + 1)])
    alpha = np.zeros((N + 1, N + 1))
    for m in range(1, N + 1):
        alpha[0, m] = -cs.sine_form_exact(model, "regularized_cos", m)
    for n in range(1, N + 1):
        for m in range(N + 1):
            alpha[n, m] = math.sqrt(math.comb(2 * n + 2 * m, 2 * n)) * cs.sine_form_exact(model, "moment", n, m)
    return lam, alpha
