"""Angular cross sections and the singular angular integrals built on them.

Two admissible forms of the grazing singularity are provided:

``PowerLawTheta``  beta(theta) = A |theta|**(-1-2s)
``PowerLawSine``   beta(theta) = A |sin theta|**(-1-2s) cos theta

both on ``[-pi/4, pi/4] minus {0}``.  Under ``t = sin(theta)**2`` the second form
turns every moment into an incomplete beta integral, which gives the exact
reference values returned by :func:`sine_form_exact`.

All integrals are even in theta and are computed on ``(0, pi/4]`` and doubled.
The quadrature maps ``theta = (pi/4) u**g`` (``g`` the grading exponent), splits
``u`` geometrically toward 0 and places Gauss-Legendre nodes on every panel; the
panel count doubles until two successive levels agree.  Weights and ``beta``
are combined in log space, and integrands that vanish like ``theta**2`` are
passed divided by ``sin(theta)**2`` so nothing overflows as s -> 1.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, QuadratureError
from .specfun import incomplete_beta

QUARTER_PI = 0.25 * math.pi


class Form(str, enum.Enum):
    POWER_LAW_THETA = "PowerLawTheta"
    POWER_LAW_SINE = "PowerLawSine"


@dataclass(frozen=True)
class SingularityModel:
    """Angular cross section ``beta(theta)`` with singularity exponent ``s``."""

    s: float = 0.5
    amplitude: float = 1.0
    form: Form = Form.POWER_LAW_SINE

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise DomainError(f"singularity exponent must lie in (0, 1), got {self.s}")
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be positive, got {self.amplitude}")
        object.__setattr__(self, "form", Form(self.form))

    def as_dict(self):
        return {"s": self.s, "amplitude": self.amplitude, "form": self.form.value}


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for the graded angular quadrature.

    ``grading_exponent`` of ``None`` picks one from ``s`` (larger as s -> 1).
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 8192
    grading_exponent: float | None = None
    nodes_per_panel: int = 20

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")
        if self.grading_exponent is not None and self.grading_exponent < 1:
            raise DomainError("grading_exponent must be >= 1")

    def as_dict(self):
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_subdivisions": self.max_subdivisions,
            "grading_exponent": self.grading_exponent,
            "nodes_per_panel": self.nodes_per_panel,
        }


DEFAULT_QUAD = QuadratureSpec()


def beta_eval(model, theta):
    """Evaluate ``beta(theta)``; even in theta, singular at 0."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr == 0):
        raise DomainError("beta is singular at theta = 0")
    if np.any(np.abs(theta_arr) > QUARTER_PI * (1 + 1e-14)):
        raise DomainError("beta is supported on |theta| <= pi/4")
    val = np.exp(log_beta(model, np.abs(theta_arr)))
    return float(val) if theta_arr.ndim == 0 else val


def log_beta(model, theta):
    """``log beta(theta)`` for ``0 < theta <= pi/4`` (no domain checks)."""
    expo = -1.0 - 2.0 * model.s
    if model.form is Form.POWER_LAW_THETA:
        return math.log(model.amplitude) + expo * np.log(theta)
    return math.log(model.amplitude) + expo * np.log(np.sin(theta)) + np.log(np.cos(theta))


# ---------------------------------------------------------------- graded rule


def grading_exponent(s, quad):
    if quad.grading_exponent is not None:
        return float(quad.grading_exponent)
    # worst integrand behaves like theta**(1 - 2s); make it at least u**2 in u
    return float(min(12, max(1, math.ceil(3.0 / (2.0 - 2.0 * s)))))


@dataclass(frozen=True)
class AngularRule:
    theta: np.ndarray
    weight: np.ndarray  # d(theta) weights on (theta_min, pi/4]
    theta_min: float
    panels: int


@functools.lru_cache(maxsize=64)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@functools.lru_cache(maxsize=256)
def graded_rule(s, g, level, order=20, top_panels=4):
    """Composite Gauss rule on ``(theta_min, pi/4]`` graded toward 0.

    ``level`` doubles every panel.  Geometric panels in ``u`` continue until
    the piece below ``theta_min``, of relative size ``theta_min**(2 - 2s)``,
    is under 1e-18, or ``theta_min`` reaches 1e-150; what remains is added by
    the callers from the leading-order behaviour of the integrand.
    """
    depth_tail = math.ceil(18.0 * math.log2(10.0) / (g * (2.0 - 2.0 * s)))
    depth_floor = math.floor(150.0 * math.log2(10.0) / g)
    depth = max(2, min(depth_tail, depth_floor))
    edges = [0.5 ** k for k in range(depth, 1, -1)]
    edges = np.array(edges + list(np.linspace(0.5, 1.0, top_panels + 1)))
    split = 2 ** level
    fine = (edges[:-1, None] + np.outer(np.diff(edges), np.arange(split)) / split).ravel()
    fine = np.append(fine, 1.0)
    x, w = _gauss_legendre(order)
    a, h = fine[:-1], np.diff(fine)
    u = (a[:, None] + h[:, None] * x).ravel()
    wu = (h[:, None] * w).ravel()
    theta = QUARTER_PI * u ** g
    weight = wu * QUARTER_PI * g * u ** (g - 1.0)
    theta.setflags(write=False)
    weight.setflags(write=False)
    return AngularRule(theta, weight, QUARTER_PI * edges[0] ** g, len(a))


def _rules(model, quad):
    g = grading_exponent(model.s, quad)
    level = 0
    while True:
        yield graded_rule(model.s, g, level, quad.nodes_per_panel)
        level += 1


def converge(evaluate, model, quad, *, mode="mixed"):
    """Refine the graded rule until ``evaluate(rule)`` stabilizes elementwise.

    ``evaluate`` maps an :class:`AngularRule` to an array of integrals.
    ``mode`` selects the acceptance test: ``"mixed"`` uses
    ``max(abs_tol, rel_tol |I|)``, ``"relative"`` drops the absolute floor (for
    positive quantities spanning many decades) and ``"log"`` treats the values
    as logarithms, so ``rel_tol`` bounds the change directly.  Raises
    :class:`QuadratureError` with the worst index if the budget runs out.
    """
    rules = _rules(model, quad)
    prev = np.asarray(evaluate(next(rules)), dtype=float)
    for rule in rules:
        cur = np.asarray(evaluate(rule), dtype=float)
        diff = np.abs(cur - prev)
        if mode == "log":
            bound = np.full_like(cur, quad.rel_tol)
        else:
            bound = quad.rel_tol * np.abs(cur)
            if mode == "mixed":
                bound = np.maximum(bound, quad.abs_tol)
        ok = diff <= bound
        if np.all(ok):
            return cur
        if 2 * rule.panels > quad.max_subdivisions:
            worst = np.unravel_index(np.argmax(np.where(ok, 0, np.nan_to_num(diff, nan=np.inf))), cur.shape)
            index = tuple(int(i) for i in worst)
            raise QuadratureError(
                f"angular quadrature did not converge within {quad.max_subdivisions} panels "
                f"(worst entry {index}, change {diff[worst]:.3e})",
                index=index,
            )
        prev = cur
    raise AssertionError("unreachable")


def reduced_nodes(model, rule):
    """Nodes and log-weights for ``int_{-pi/4}^{pi/4} beta sin^2 F``.

    The last node is ``theta_min`` and carries the leading-order weight of the
    omitted interval ``(-theta_min, theta_min)``, where ``beta sin^2`` behaves
    like ``A theta**(1 - 2s)`` for both forms.
    """
    two_minus = 2.0 - 2.0 * model.s
    log_w = np.log(2.0 * rule.weight) + log_beta(model, rule.theta) + 2.0 * np.log(np.sin(rule.theta))
    log_tail = math.log(2.0 * model.amplitude) + two_minus * math.log(rule.theta_min) - math.log(two_minus)
    return np.append(rule.theta, rule.theta_min), np.append(log_w, log_tail)


def integrate_even(model, reduced_integrand, quad=DEFAULT_QUAD, *, mode="mixed"):
    """``int_{-pi/4}^{pi/4} beta(theta) f(theta) d theta`` for an even ``f`` vanishing at 0.

    ``reduced_integrand(theta)`` must return ``f(theta) / sin(theta)**2``,
    bounded as theta -> 0; it receives the nodes on ``(0, pi/4]`` and may
    return an array whose trailing axis runs over them.
    """

    def evaluate(rule):
        theta, log_w = reduced_nodes(model, rule)
        return np.asarray(reduced_integrand(theta)) @ np.exp(log_w)

    return converge(evaluate, model, quad, mode=mode)


# ------------------------------------------------------------------- moments


def _check_index(n, lo, name):
    if int(n) != n or n < lo:
        raise DomainError(f"{name} must be an integer >= {lo}, got {n}")
    return int(n)


def sin2(theta):
    return np.sin(theta) ** 2


def one_minus_cos_power_over_sin2(k, theta):
    """``(1 - cos(theta)**k) / sin(theta)**2`` for each exponent in ``k`` (rows)."""
    x = sin2(theta)
    k = np.asarray(k, dtype=float)
    return -np.expm1(0.5 * k[:, None] * np.log1p(-x)) / x


def log_angular_moments(model, n_values, m_values, quad=DEFAULT_QUAD):
    """``log Lambda_{n,m}`` for all pairs of the two index arrays.

    ``Lambda_{n,m} = int beta(theta) sin(theta)**(2n) cos(theta)**(2m)``, n >= 1.
    Each row is scaled by its largest term before the node sum, so entries
    far below the double range of the individual terms stay representable.
    """
    n_values = np.asarray(n_values, dtype=float)
    m_values = np.asarray(m_values, dtype=float)
    if np.any(n_values < 1):
        raise DivergenceError("Lambda_{0,m} diverges; use the regularized moments")
    s, amp = model.s, model.amplitude

    def evaluate(rule):
        theta = rule.theta
        log_sin = np.log(np.sin(theta))
        log_cos = 0.5 * np.log1p(-sin2(theta))
        log_wb = np.log(2.0 * rule.weight) + log_beta(model, theta)
        a = 2.0 * n_values[:, None] * log_sin + log_wb
        # leading-order piece of (-theta_min, theta_min)
        tail = (math.log(2.0 * amp) + (2.0 * n_values - 2.0 * s) * math.log(rule.theta_min)
                - np.log(2.0 * n_values - 2.0 * s))
        a = np.concatenate([a, tail[:, None]], axis=1)
        b = np.concatenate([2.0 * m_values[:, None] * log_cos, np.zeros((len(m_values), 1))], axis=1)
        row_max = a.max(axis=1, keepdims=True)
        return row_max + np.log(np.exp(a - row_max) @ np.exp(b).T)

    return converge(evaluate, model, quad, mode="log")


def angular_moment(model, n, m, quad=DEFAULT_QUAD):
    """``Lambda_{n,m} = int beta sin^{2n} cos^{2m}`` for ``n >= 1``, ``m >= 0``."""
    n = _check_index(n, 0, "n")
    m = _check_index(m, 0, "m")
    if n == 0:
        raise DivergenceError("Lambda_{0,m} diverges at theta = 0")
    return float(np.exp(log_angular_moments(model, [n], [m], quad)[0, 0]))


def regularized_moments(model, n_values, quad=DEFAULT_QUAD):
    """Vector of ``int beta (1 - cos^{2n} - sin^{2n})`` for each ``n`` (0 at n = 1)."""
    n_values = np.asarray(n_values, dtype=float)
    result = np.zeros(n_values.shape)
    live = n_values > 1
    if np.any(live):
        n_live = n_values[live]

        def reduced(theta):
            sin_pow = np.exp((2.0 * n_live[:, None] - 2.0) * np.log(np.sin(theta)))
            return one_minus_cos_power_over_sin2(2.0 * n_live, theta) - sin_pow

        result[live] = integrate_even(model, reduced, quad, mode="relative")
    return result


def regularized_moment(model, n, quad=DEFAULT_QUAD):
    """``int beta (1 - cos^{2n} - sin^{2n})``, the radial eigenvalue; exactly 0 at n = 1."""
    n = _check_index(n, 1, "n")
    if n == 1:
        return 0.0
    return float(regularized_moments(model, [n], quad)[0])


def regularized_cos_moments(model, n_values, quad=DEFAULT_QUAD):
    """Vector of ``int beta (1 - cos^{2n})`` for each ``n >= 1``."""
    n_values = np.asarray(n_values, dtype=float)
    return integrate_even(
        model, lambda theta: one_minus_cos_power_over_sin2(2.0 * n_values, theta), quad, mode="relative"
    )


def regularized_cos_moment(model, n, quad=DEFAULT_QUAD):
    """``int beta (1 - cos^{2n})`` for ``n >= 1``."""
    n = _check_index(n, 1, "n")
    return float(regularized_cos_moments(model, [n], quad)[0])


# -------------------------------------------------------- exact sine-form values


def sine_form_exact(model, kind, n, m=0):
    """Closed forms for the ``PowerLawSine`` model via incomplete beta integrals.

    ``kind`` is one of ``"moment"`` (Lambda_{n,m}), ``"regularized"``
    (the eigenvalue) or ``"regularized_cos"``.  Uses
    ``1 - (1-t)**n = t sum_{l<n} (1-t)**l`` so every term is positive.
    """
    if model.form is not Form.POWER_LAW_SINE:
        raise DomainError("closed forms exist only for the PowerLawSine model")
    s, amp = model.s, model.amplitude
    if kind == "moment":
        return amp * incomplete_beta(n - s, m + 1.0, 0.5)
    cos_part = amp * float(np.sum(incomplete_beta(1.0 - s, np.arange(1, n + 1, dtype=float), 0.5)))
    if kind == "regularized_cos":
        return cos_part
    if kind == "regularized":
        if n == 1:
            return 0.0
        return cos_part - amp * incomplete_beta(n - s, 1.0, 0.5)
    raise DomainError(f"unknown closed-form kind {kind!r}")
