"""Command line: ``spectrum``, ``solve``, ``verify`` and ``report``.

Exit status: 0 success, 1 failed verification under ``--strict``,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import cascade, config, field, spectrum, verify
from .errors import ConfigError, DomainError, NumericalError, RadBoltzError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("radboltz")

HELP_DEFAULTS = """\
configuration file (YAML or JSON), all fields optional:
  model:      {s: 0.5, amplitude: 1.0, form: PowerLawSine}   form is PowerLawSine or PowerLawTheta
  N:          32
  initial:    {kind: mode, n: 2, amplitude: 0.05}
              kind: coefficients (coefficients: [...]) | mode (n, amplitude)
                    | gaussian_bump (center, width, amplitude, n_perp: true) | random (norm: 0.05)
  time:       {t_end: 5.0, n_points: 51, spacing: linear}    spacing is linear or log
  delta:      0.5
  quadrature: {abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 8192,
               grading_exponent: null, nodes_per_panel: 20}
  output:     radboltz-run
  verify:     {fourier: true, exponent_fit: true}
  seed:       0
every run writes its full resolved configuration to resolved-config.json.
"""


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_rows(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _load_config(args):
    cfg = config.load_file(args.config) if args.config else config.RunConfig()
    updates = {}
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        updates["seed"] = args.seed
    if getattr(args, "output", None):
        updates["output"] = args.output
    if updates:
        data = cfg.resolved()
        data.update(updates)
        cfg = config.from_dict(data, "<command line>")
    return cfg


def _tables(cfg, args):
    if getattr(args, "tables", None):
        try:
            return spectrum.read_snapshot(args.tables)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read tables {args.tables}: {exc}") from exc
    return spectrum.build_tables(cfg.model, cfg.N, cfg.quad)


def _emit_common(cfg, out):
    _write(out / "resolved-config.json", config.dumps(cfg.resolved()))


def initial_data(cfg):
    spec = cfg.initial
    kind, N = spec["kind"], cfg.N
    if kind == "coefficients":
        b = np.zeros(N + 1)
        b[: len(spec["coefficients"])] = spec["coefficients"]
        return cascade.InitialData(b, "coefficients")
    if kind == "mode":
        return cascade.InitialData.single_mode(N, int(spec.get("n", 2)), float(spec.get("amplitude", 0.05)))
    if kind == "gaussian_bump":
        profile = field.RadialProfile.named(
            "gaussian_bump", center=spec.get("center", 1.0), width=spec.get("width", 1.0),
            amplitude=spec.get("amplitude", 0.05))
        return field.project_initial(profile, N, cfg.quad, n_perp=bool(spec.get("n_perp", True)))
    rng = np.random.default_rng(cfg.seed)
    return cascade.InitialData(verify.random_n_perp(rng, N, float(spec.get("norm", 0.05))),
                               f"random, seed {cfg.seed}")


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg, args, out):
    tables = _tables(cfg, args)
    spectrum.write_csv(tables, out / "spectrum.csv")
    spectrum.write_snapshot(tables, out / "spectrum.json")
    print(f"wrote {out / 'spectrum.csv'} and {out / 'spectrum.json'} (N = {tables.N})")
    return EXIT_OK


def cmd_solve(cfg, args, out):
    tables = _tables(cfg, args)
    init = initial_data(cfg)
    if init.N != tables.N:
        raise ConfigError(f"initial data has N = {init.N}, tables have N = {tables.N}")
    norm = float(np.linalg.norm(init.b))
    if norm > config.NORM_WARNING:
        log.warning("initial norm %.3g exceeds %.2g; the small-data decay theory may not apply",
                    norm, config.NORM_WARNING)
    t = cfg.time_grid()
    summary = {"initial_norm": norm, "initial_source": init.source, "in_N_perp": bool(init.in_N_perp),
               "seed": cfg.seed, "N": tables.N}
    if init.in_N_perp:
        sol = cascade.solve_closed_form(tables, init)
        traj = cascade.evaluate(sol, t)
        _write(out / "solution.json", config.dumps(sol.as_dict()))
        summary["method"] = "closed form" if sol.numeric_from is None else f"closed form, numeric from mode {sol.numeric_from}"
    else:
        traj = cascade.solve_numeric(tables, init, t)
        summary["method"] = "numeric"
    traj.write_csv(out / "trajectory.csv")
    records = []
    if init.in_N_perp:
        dec = field.decay_certificate(traj, tables, cfg.delta, norm)
        mono = field.lyapunov_monotonicity(traj, tables)
        records = dec.records()
        summary.update({"decay_pass": dec.passed, "decay_max_ratio": dec.max_ratio,
                        "first_violation": dec.first_violation, "lyapunov_pass": mono.passed,
                        "lyapunov_max_increase": mono.max_increase, "delta": cfg.delta})
    else:
        summary["decay"] = "skipped: initial data has mass or energy components"
    if args.format == "structured":
        _write(out / "decay-report.json", config.dumps({"summary": summary, "records": records}))
    else:
        _write_rows(out / "decay-report.csv", ["time", "norm", "value", "bound", "pass"],
                    [[r["time"], r["norm"], r["value"], r["bound"], str(r["pass"]).lower()] for r in records])
        _write(out / "decay-summary.json", config.dumps(summary))
    print(f"solved {len(t)} times with {summary['method']}; decay "
          + ("pass" if summary.get("decay_pass") else "FAIL" if "decay_pass" in summary else "skipped"))
    ok = summary.get("decay_pass", True) and summary.get("lyapunov_pass", True)
    return EXIT_VERIFY if args.strict and not ok else EXIT_OK


def cmd_verify(cfg, args, out):
    tables = _tables(cfg, args)
    checks = verify.run_suite(tables, seed=cfg.seed, quad=cfg.quad, full=False)
    if cfg.verify_exponent_fit:
        checks.append(verify.check_exponent_fit(tables.model, cfg.quad))
    if cfg.verify_fourier and tables.N >= 12:
        checks.extend(verify.check_fourier(tables, cfg.quad))
        checks.append(verify.check_diagonalization(tables, cfg.quad, min(32, tables.N)))
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    if args.format == "structured":
        _write(out / "verify-report.json",
               config.dumps({"checks": [c.as_dict() for c in checks], "failed": failed, "seed": cfg.seed}))
    else:
        _write_rows(out / "verify-report.csv", ["check", "value", "tolerance", "pass"],
                    [[c.name, c.value, c.tolerance, str(c.passed).lower()] for c in checks])
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if args.strict and failed else EXIT_OK


def cmd_report(args):
    run = Path(args.run_dir)
    try:
        resolved = json.loads((run / "resolved-config.json").read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{run} is not a run directory: {exc}") from exc
    cfg = config.from_dict(resolved, str(run / "resolved-config.json"))
    lines = [f"run directory: {run}",
             f"model: {cfg.model.form.value}, s = {cfg.model.s}, amplitude = {cfg.model.amplitude}; N = {cfg.N}"]
    summary = None
    for name in ("decay-report.json", "decay-summary.json"):
        if (run / name).exists():
            data = json.loads((run / name).read_text())
            summary = data.get("summary", data)
    if summary is not None:
        if "decay_pass" in summary:
            lines.append(f"decay certificate (delta = {summary['delta']}): "
                         f"{'pass' if summary['decay_pass'] else 'FAIL'}, max norm/bound {summary['decay_max_ratio']:.6g}")
            lines.append(f"Lyapunov monotonicity: {'pass' if summary['lyapunov_pass'] else 'FAIL'}")
        else:
            lines.append(f"decay certificate: {summary.get('decay')}")
        lines.append(f"initial norm {summary['initial_norm']:.6g} ({summary['initial_source']}), method {summary['method']}")
    if (run / "verify-report.json").exists():
        data = json.loads((run / "verify-report.json").read_text())
        lines.append(f"verification: {len(data['checks']) - len(data['failed'])}/{len(data['checks'])} passed")
    elif (run / "verify-report.csv").exists():
        with open(run / "verify-report.csv") as fh:
            rows = list(csv.DictReader(fh))
        lines.append(f"verification: {sum(r['pass'] == 'true' for r in rows)}/{len(rows)} passed")
    if len(lines) == 2:
        lines.append("no reports found")
    print("\n".join(lines))
    return EXIT_OK


# -------------------------------------------------------------------- main


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (YAML or JSON)")
    common.add_argument("--strict", action="store_true", help="exit with status 1 if any check fails")
    common.add_argument("--seed", type=int, help="seed for random initial data (unsigned 64-bit)")
    common.add_argument("--format", choices=("tabular", "structured"), default="structured",
                        help="report format (default structured)")
    common.add_argument("--output", help="output directory (overrides the config)")
    common.add_argument("--tables", help="spectrum snapshot to use instead of recomputing")
    parser = argparse.ArgumentParser(
        prog="radboltz", description="Spectral solver for the radial non-cutoff Boltzmann equation.",
        epilog=HELP_DEFAULTS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="compute and write eigenvalue and coupling tables")
    sub.add_parser("solve", parents=[common], help="solve the mode cascade and certify decay")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    rep = sub.add_parser("report", help="summarize a previous run directory")
    rep.add_argument("run_dir")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args)
        cfg = _load_config(args)
        out = Path(cfg.output)
        _emit_common(cfg, out)
        return {"spectrum": cmd_spectrum, "solve": cmd_solve, "verify": cmd_verify}[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError, RadBoltzError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
