"""Triangular mode cascade: exponential-sum closed form and a numeric reference.

The truncated system is::

    db_0/dt = 0
    db_n/dt = -lambda_{2n} b_n + alpha_{0,2n} b_0 b_n + sum_{k+l=n, k>=1, l>=0} w_{k,l} b_k b_l

For data with ``b_0 = b_1 = 0`` the first two modes stay zero, mode ``n`` is
forced only by modes ``2..n-2``, and every mode is a finite sum
``sum gamma exp(-Lambda t)``.  Mode ``n`` is solved by variation of constants:
a forcing term ``c exp(-Lambda t)`` contributes ``c / (lambda_{2n} - Lambda)``
times ``exp(-Lambda t)``, and the homogeneous coefficient absorbs the rest of
``b_n(0)``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError, TermBudgetError

log = logging.getLogger(__name__)

MERGE_TOL = 1e-9
PRUNE_TOL = 1e-16
RESONANCE_TOL = 1e-9
TERM_BUDGET = 100_000
DEFAULT_N = 64


@dataclass(frozen=True)
class ModeCoefficients:
    t: float
    b: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.b)):
            raise NumericalError(f"non-finite mode coefficients at t = {self.t}")

    @property
    def in_N_perp(self):
        return len(self.b) < 2 or (self.b[0] == 0 and self.b[1] == 0)


@dataclass(frozen=True)
class InitialData:
    """Initial coefficients ``b_n(0)``; ``source`` records where they came from."""

    b: np.ndarray
    source: str = "explicit"

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 1 or len(b) < 3:
            raise DomainError("initial data needs a coefficient vector of length N + 1 >= 3")
        if not np.all(np.isfinite(b)):
            raise DomainError("initial coefficients must be finite")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def N(self):
        return len(self.b) - 1

    @property
    def in_N_perp(self):
        return self.b[0] == 0 and self.b[1] == 0

    @classmethod
    def single_mode(cls, N, n, amplitude):
        b = np.zeros(N + 1)
        b[n] = amplitude
        return cls(b, f"mode {n}, amplitude {amplitude!r}")


@dataclass
class Trajectory:
    t: np.ndarray
    b: np.ndarray  # shape (len(t), N + 1)

    def at(self, i):
        return ModeCoefficients(float(self.t[i]), self.b[i])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"b{n}" for n in range(self.b.shape[1])])
            for t, row in zip(self.t, self.b):
                writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


# ----------------------------------------------------------------- right side


def _pair_index(N):
    k, l = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    keep = (k >= 1) & (k + l <= N)
    return k[keep], l[keep]


def rhs(tables, b):
    """Time derivative of the mode vector ``b`` (length ``N + 1``)."""
    b = np.asarray(b.b if isinstance(b, ModeCoefficients) else b, dtype=float)
    N = tables.N
    if b.shape != (N + 1,):
        raise DomainError(f"mode vector has length {len(b)}, tables expect {N + 1}")
    k, l = _pair_index(N)
    out = np.bincount(k + l, weights=tables.w[k, l] * b[k] * b[l], minlength=N + 1)
    out += (-tables.lam + tables.alpha[0] * b[0]) * b
    out[0] = 0.0
    return out


def _make_rhs(tables):
    k, l = _pair_index(tables.N)
    wkl = tables.w[k, l]
    lin = -tables.lam
    a0 = tables.alpha[0]
    size = tables.N + 1

    def f(_t, b):
        out = np.bincount(k + l, weights=wkl * b[k] * b[l], minlength=size)
        out += (lin + a0 * b[0]) * b
        out[0] = 0.0
        return out

    return f


# -------------------------------------------------------------- numeric path


def solve_numeric(tables, init, t_grid, *, rtol=1e-12, atol=None):
    """Integrate the full system with an adaptive 8th-order Runge-Kutta scheme.

    ``atol`` defaults to ``1e-18 max(|b(0)|, 1)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    b0 = np.asarray(init.b if isinstance(init, InitialData) else init, dtype=float)
    if b0.shape != (tables.N + 1,):
        raise DomainError(f"initial vector has length {len(b0)}, tables expect {tables.N + 1}")
    if t_grid.ndim != 1 or t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("time grid must start at 0 and increase strictly")
    if atol is None:
        atol = 1e-18 * max(np.max(np.abs(b0)), 1.0)
    if len(t_grid) == 1 or not np.any(b0):
        return Trajectory(t_grid.copy(), np.tile(b0, (len(t_grid), 1)))
    res = solve_ivp(_make_rhs(tables), (0.0, t_grid[-1]), b0, method="DOP853",
                    t_eval=t_grid, rtol=rtol, atol=atol)
    if not res.success:
        raise NumericalError(f"numeric integration failed: {res.message}")
    b = res.y.T
    if not np.all(np.isfinite(b)):
        raise NumericalError("numeric integration produced non-finite values")
    return Trajectory(t_grid.copy(), b)


# ---------------------------------------------------------- closed-form path


@dataclass
class ExpSumSolution:
    """Per mode, arrays of exponents ``Lambda`` and coefficients ``gamma``.

    Modes from ``numeric_from`` on hit a near-resonance and are evaluated by
    the numeric integrator instead.
    """

    tables: object
    init: InitialData
    exponents: list
    coefficients: list
    merge_tol: float
    pruned: int = 0
    numeric_from: int | None = None
    events: list = field(default_factory=list)

    def terms(self, n):
        return list(zip(self.exponents[n].tolist(), self.coefficients[n].tolist()))

    def as_dict(self):
        return {
            "merge_tol": self.merge_tol,
            "pruned": self.pruned,
            "numeric_from": self.numeric_from,
            "events": list(self.events),
            "modes": {str(n): [[lam, g] for lam, g in self.terms(n)] for n in range(len(self.exponents))},
        }


def _merge(lam, gamma, tol):
    """Sort by exponent and sum coefficients of exponents equal within ``tol`` (relative)."""
    if len(lam) == 0:
        return lam, gamma
    order = np.argsort(lam, kind="stable")
    lam, gamma = lam[order], gamma[order]
    start = np.ones(len(lam), dtype=bool)
    start[1:] = np.diff(lam) > tol * np.maximum(np.abs(lam[1:]), np.finfo(float).tiny)
    group = np.cumsum(start) - 1
    return lam[start], np.bincount(group, weights=gamma)


def solve_closed_form(tables, init, *, merge_tol=MERGE_TOL, prune_tol=PRUNE_TOL,
                      resonance_tol=RESONANCE_TOL, term_budget=TERM_BUDGET):
    """Exponential-sum solution for data with ``b_0(0) = b_1(0) = 0``."""
    if not isinstance(init, InitialData):
        init = InitialData(init)
    if not init.in_N_perp:
        raise DomainError("the closed form needs b_0(0) = b_1(0) = 0; use solve_numeric")
    N = tables.N
    if init.N != N:
        raise DomainError(f"initial vector has length {init.N + 1}, tables expect {N + 1}")
    lam_tab, w = tables.lam, tables.w
    floor = prune_tol * float(np.linalg.norm(init.b))
    empty = np.zeros(0)
    exps, coefs = [empty, empty], [empty, empty]
    sol = ExpSumSolution(tables, init, exps, coefs, merge_tol)
    for n in range(2, N + 1):
        if sol.numeric_from is not None:
            exps.append(empty)
            coefs.append(empty)
            continue
        f_lam, f_gam = [], []
        for k in range(2, n - 1):
            l = n - k
            assert k < n and l < n  # triangular: only lower modes are read
            if len(exps[k]) == 0 or len(exps[l]) == 0:
                continue
            f_lam.append(np.add.outer(exps[k], exps[l]).ravel())
            f_gam.append((w[k, l] * np.outer(coefs[k], coefs[l])).ravel())
        lam_n = lam_tab[n]
        if f_lam:
            f_lam, f_gam = _merge(np.concatenate(f_lam), np.concatenate(f_gam), merge_tol)
            gap = lam_n - f_lam
            close = np.abs(gap) < resonance_tol * np.maximum(np.abs(f_lam), abs(lam_n))
            if np.any(close):
                bad = float(f_lam[np.argmax(close)])
                msg = (f"mode {n}: forcing exponent {bad:.17g} within resonance tolerance of "
                       f"lambda = {lam_n:.17g}; modes >= {n} switch to the numeric integrator")
                log.warning(msg)
                sol.events.append(msg)
                sol.numeric_from = n
                exps.append(empty)
                coefs.append(empty)
                continue
            part = f_gam / gap
            lam_all = np.concatenate([[lam_n], f_lam])
            gam_all = np.concatenate([[init.b[n] - part.sum()], part])
        else:
            lam_all = np.array([lam_n])
            gam_all = np.array([init.b[n]])
        keep = np.abs(gam_all) >= floor
        keep &= gam_all != 0
        sol.pruned += int(np.count_nonzero(~keep))
        lam_all, gam_all = lam_all[keep], gam_all[keep]
        if len(lam_all) > term_budget:
            raise TermBudgetError(f"mode {n} needs {len(lam_all)} terms, budget is {term_budget}")
        exps.append(lam_all)
        coefs.append(gam_all)
    return sol


def evaluate(sol, t):
    """Mode vector at time ``t`` (scalar) or a :class:`Trajectory` for an array of times."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise DomainError("evaluation times must be nonnegative")
    N = len(sol.exponents) - 1
    b = np.zeros((len(t_arr), N + 1))
    for n in range(N + 1):
        if len(sol.exponents[n]):
            b[:, n] = np.exp(-np.outer(t_arr, sol.exponents[n])) @ sol.coefficients[n]
    if sol.numeric_from is not None:
        grid = np.unique(np.concatenate([[0.0], t_arr]))
        traj = solve_numeric(sol.tables, sol.init, grid)
        pos = np.searchsorted(grid, t_arr)
        b[:, sol.numeric_from:] = traj.b[pos, sol.numeric_from:]
    if np.ndim(t) == 0:
        return ModeCoefficients(float(t), b[0])
    return Trajectory(t_arr, b)
