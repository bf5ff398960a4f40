"""Verification suite: each check returns a :class:`Check` record.

The checks compare the solver against closed forms, an independent
integrator and the Fourier-side algebra; ``run_suite`` collects them for the
command line and the acceptance tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import cascade, fourier
from .cross_section import DEFAULT_QUAD, Form, SingularityModel, angular_moment
from .field import decay_certificate, gelfand_shilov_diagnostic, lyapunov_monotonicity
from .spectrum import (asymptotic_exponent_fit, build_tables, eigenvalue_general, no_resonance_check,
                       sine_form_tables)

RHO_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    params: dict = field(default_factory=dict)
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "params": self.params, "value": self.value,
                "tolerance": self.tolerance, "pass": bool(self.passed), "detail": self.detail}

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: {self.value:.3e} vs {self.tolerance:.1e}{extra}"


def _below(name, value, tol, **params):
    value = float(value)
    return Check(name, value, tol, bool(value < tol), params)


def random_n_perp(rng, N, norm):
    """Random coefficients on modes ``2..N`` with the given l2 norm."""
    b = np.zeros(N + 1)
    b[2:] = rng.standard_normal(N - 1)
    return b * (norm / np.linalg.norm(b))


def slow_decay_data(N, norm):
    """Coefficients ``b_n ~ 1/n`` on modes ``2..N``: no smoothing at t = 0."""
    b = np.zeros(N + 1)
    b[2:] = 1.0 / np.arange(2, N + 1)
    return b * (norm / np.linalg.norm(b))


def _rel_traj_error(a, b):
    scale = np.max(np.abs(b), axis=1)
    diff = np.max(np.abs(a - b), axis=1)
    return float(np.max(np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), diff)))


# ------------------------------------------------------------------- checks


def check_invariant_eigenvalues(model, quad=DEFAULT_QUAD):
    """lambda_2 from the full integrand and alpha_{0,0} from the tables."""
    lam2 = abs(eigenvalue_general(model, 1, 0, quad).value)
    tables = build_tables(model, 2, quad)
    return [
        _below("lambda_2 = 0", lam2, 1e-12, form=model.form.value, s=model.s),
        Check("alpha_00 = 0", float(abs(tables.alpha[0, 0])), 0.0, tables.alpha[0, 0] == 0.0,
              {"form": model.form.value, "s": model.s}),
    ]


def check_no_resonance(tables, jmax=30):
    rep = no_resonance_check(tables, jmax)
    return Check("no resonance", rep.margin, 0.0, rep.passed,
                 {"form": tables.model.form.value, "s": tables.model.s, "jmax": jmax},
                 f"min margin at {rep.argmin}, {len(rep.violations)} violations")


def check_closed_form(tables, tol=1e-8):
    """PowerLawSine tables against incomplete-beta values on ``n + m <= N``."""
    lam_ref, alpha_ref = sine_form_tables(tables.model, tables.N)
    lam_err = np.max(np.abs(tables.lam[2:] / lam_ref[2:] - 1))
    lam_err = max(lam_err, abs(tables.lam[1]), abs(tables.lam[0]))
    n, m = np.meshgrid(np.arange(tables.N + 1), np.arange(tables.N + 1), indexing="ij")
    tri = (n + m <= tables.N) & ~((n == 0) & (m == 0))
    alpha_err = np.max(np.abs(tables.alpha[tri] / alpha_ref[tri] - 1))
    return _below("closed-form oracle", max(lam_err, alpha_err), tol, s=tables.model.s, N=tables.N)


def check_exponent_fit(model, quad=DEFAULT_QUAD, k_min=50, k_max=200, tol=0.05):
    tables = build_tables(model, k_max, quad)
    slope, rms = asymptotic_exponent_fit(tables, k_min, k_max)
    return Check("exponent fit", slope, tol, abs(slope - model.s) <= tol,
                 {"s": model.s, "form": model.form.value, "k": [k_min, k_max]}, f"rms residual {rms:.2e}")


def check_cascade_exactness(tables, t_end=5.0):
    t = np.linspace(0.0, t_end, 51)
    lam, N = tables.lam, tables.N
    out = []
    b = np.zeros(N + 1)
    b[2], b[3], b[4] = 0.03, 0.02, 0.01
    sol = cascade.solve_closed_form(tables, cascade.InitialData(b))
    traj = cascade.evaluate(sol, t).b
    err23 = max(np.max(np.abs(traj[:, 2] / (b[2] * np.exp(-lam[2] * t)) - 1)),
                np.max(np.abs(traj[:, 3] / (b[3] * np.exp(-lam[3] * t)) - 1)))
    out.append(_below("modes 2, 3 exponential", err23, 1e-10))
    # b_4 from the two-exponential display, with Lambda_{2,2} computed afresh
    lam22 = angular_moment(tables.model, 2, 2, tables.quad)
    c = 0.6 * math.sqrt(70.0) * b[2] ** 2 * lam22 / (lam[4] - 2 * lam[2])
    b4 = (b[4] - c) * np.exp(-lam[4] * t) + c * np.exp(-2 * lam[2] * t)
    err4 = np.max(np.abs(traj[:, 4] / b4 - 1))
    terms = dict(sol.terms(4))
    coef_err = abs(terms.get(2 * lam[2], np.nan) / c - 1)
    out.append(_below("mode 4 two-exponential", max(err4, coef_err), 1e-8))
    worst = 0.0
    for n in range(2, N + 1):
        single = cascade.solve_closed_form(tables, cascade.InitialData.single_mode(N, n, 0.05))
        ok = single.terms(n) == [(float(lam[n]), 0.05)]
        worst = max(worst, 0.0 if ok else 1.0)
    out.append(Check("single-mode exact", worst, 0.0, worst == 0.0, {"modes": [2, N]}))
    return out


def random_runs(tables, count=20, norm=0.05, seed=0, t_end=5.0, points=51):
    """Closed-form and numeric trajectories for random N-perp data."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, t_end, points)
    runs = []
    for _ in range(count):
        init = cascade.InitialData(random_n_perp(rng, tables.N, norm))
        closed = cascade.evaluate(cascade.solve_closed_form(tables, init), t)
        numeric = cascade.solve_numeric(tables, init, t)
        runs.append((init, closed, numeric))
    return runs


def check_cross_validation(runs, tol=1e-6):
    err = max(_rel_traj_error(numeric.b, closed.b) for _, closed, numeric in runs)
    return _below("closed form vs numeric", err, tol, runs=len(runs))


def check_decay(runs, tables, delta=0.5, decay_t_end=10.0):
    """Decay bound and Lyapunov monotonicity on ``[0, decay_t_end]`` for each run."""
    ratios, increases = [], []
    decay_ok = mono_ok = True
    t = np.linspace(0.0, decay_t_end, 101)
    for init, _, _ in runs:
        traj = cascade.evaluate(cascade.solve_closed_form(tables, init), t)
        dec = decay_certificate(traj, tables, delta, float(np.linalg.norm(init.b)))
        mono = lyapunov_monotonicity(traj, tables)
        ratios.append(dec.max_ratio)
        scale = float(np.max(mono.values)) or 1.0
        increases.append(mono.max_increase / scale)
        decay_ok &= dec.passed
        mono_ok &= mono.passed
    return [
        Check("decay bound", max(ratios), 1.0, decay_ok, {"delta": delta}, "max of norm / bound"),
        Check("Lyapunov monotone", max(increases), 1e-10, mono_ok, {},
              "max increase relative to the largest value"),
    ]


def check_fourier(tables, quad=DEFAULT_QUAD, n_max=12, link_max=20):
    worst = 0.0
    for n in range(0, n_max + 1):
        for m in range(0, n_max + 1 - n):
            if n + m == 0:
                continue
            worst = max(worst, fourier.product_identity_check(tables, n, m, RHO_GRID, quad))
    link = max(fourier.hermite_link_check(n, quad=quad) for n in range(link_max + 1))
    maxwell = fourier.FourierProfile.mode(0)
    stat = np.max(np.abs(fourier.bobylev_apply(tables.model, maxwell, maxwell, np.linspace(0, 8, 33), quad)))
    return [
        _below("product identities", worst, 1e-6, n_plus_m=n_max),
        _below("Hermite link", link, 1e-6, n=link_max),
        _below("Maxwellian stationary", stat, 1e-10),
    ]


def check_diagonalization(tables, quad=DEFAULT_QUAD, n_max=32, tol=1e-8):
    _, err = fourier.diagonalization_check(tables, np.arange(1, min(n_max, tables.N) + 1), 1.0, quad)
    return _below("L1 + L2 = lambda", float(np.max(err)), tol, n=n_max)


def check_smoothing(tables, times=(0.25, 0.5, 1.0), norm=0.05):
    init = cascade.InitialData(slow_decay_data(tables.N, norm))
    sol = cascade.solve_closed_form(tables, init)
    rates = [gelfand_shilov_diagnostic(cascade.evaluate(sol, t), tables)[0] for t in times]
    ok = rates[0] > 0 and all(b > a for a, b in zip(rates, rates[1:]))
    return Check("Gelfand-Shilov rate", rates[0], 0.0, ok, {"times": list(times)},
                 "rates " + ", ".join(f"{r:.4g}" for r in rates))


def partition_sums(lam, n):
    """All sums ``lambda_{2j_1} + ... `` with parts ``j_i >= 2`` adding to ``n``."""
    out = set()

    def rec(rest, smallest, acc):
        if rest == 0:
            out.add(acc)
            return
        for j in range(smallest, rest + 1):
            rec(rest - j, j, acc + lam[j])

    rec(n, 2, 0.0)
    return np.array(sorted(out))


def check_structure(tables, small_tables, runs, quad=DEFAULT_QUAD):
    invariant = max(float(np.max(np.abs(numeric.b[:, :2]))) for _, _, numeric in runs)
    worst_gap = 0.0
    shape_ok = True
    for init, _, _ in runs[:3]:
        sol = cascade.solve_closed_form(tables, init)
        for n in range(2, tables.N + 1):
            exps = sol.exponents[n]
            if len(exps):
                worst_gap = min(worst_gap, float(np.min(exps - tables.lam[n]) / tables.lam[n]))
            if n <= 12 and len(exps):
                sums = partition_sums(tables.lam, n)
                dist = np.min(np.abs(exps[:, None] - sums[None, :]) / sums[None, :], axis=1)
                shape_ok &= bool(np.all(dist < 1e-9))
    rng = np.random.default_rng(7)
    b_small = np.zeros(small_tables.N + 1)
    b_small[2:9] = rng.standard_normal(7)
    b_small *= 0.05 / np.linalg.norm(b_small)
    b_big = np.zeros(tables.N + 1)
    b_big[: small_tables.N + 1] = b_small
    t = np.linspace(0.0, 5.0, 26)
    lo = cascade.evaluate(cascade.solve_closed_form(small_tables, cascade.InitialData(b_small)), t).b[:, :9]
    hi = cascade.evaluate(cascade.solve_closed_form(tables, cascade.InitialData(b_big)), t).b[:, :9]
    trunc = float(np.max(np.abs(lo - hi)) / np.max(np.abs(b_small)))
    return [
        Check("b0 = b1 = 0 preserved", invariant, 0.0, invariant == 0.0),
        Check("exponents >= lambda_2n", worst_gap, -1e-12, worst_gap >= -1e-12 and shape_ok, {},
              "exponent shapes match partition sums" if shape_ok else "exponent not a partition sum"),
        _below("truncation stability", trunc, 1e-12, N=[small_tables.N, tables.N]),
    ]


# -------------------------------------------------------------------- suite


def run_suite(tables, *, seed=0, quad=DEFAULT_QUAD, full=True):
    """Checks for one set of tables; ``full`` adds the slower Fourier and fit checks."""
    checks = list(check_invariant_eigenvalues(tables.model, quad))
    if tables.N >= 4:
        checks.append(check_no_resonance(tables, min(30, tables.N // 2)))
    if tables.model.form is Form.POWER_LAW_SINE:
        checks.append(check_closed_form(tables))
    if tables.N >= 4:
        checks.extend(check_cascade_exactness(tables))
        runs = random_runs(tables, seed=seed)
        checks.append(check_cross_validation(runs))
        checks.extend(check_decay(runs, tables))
        checks.append(check_smoothing(tables))
        if tables.N >= 16:
            small = build_tables(tables.model, 16, quad) if tables.N > 16 else tables
            checks.extend(check_structure(tables, small, runs, quad))
    if full:
        checks.append(check_exponent_fit(tables.model, quad))
        if tables.N >= 12:
            checks.extend(check_fourier(tables, quad))
        checks.append(check_diagonalization(tables, quad, min(32, tables.N)))
    return checks


def default_tables(model=None, N=32, quad=DEFAULT_QUAD):
    return build_tables(model or SingularityModel(), N, quad)


def grid_models(forms=(Form.POWER_LAW_THETA, Form.POWER_LAW_SINE), s_values=(0.25, 0.5, 0.75)):
    return [SingularityModel(s=s, form=f) for f, s in itertools.product(forms, s_values)]
