"""Run configuration: parsing, validation and the resolved form written with every run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import yaml

from .cross_section import QuadratureSpec, SingularityModel
from .errors import ConfigError, DomainError

# initial-data norm above which the small-data regime is doubtful
NORM_WARNING = 0.1

_SECTIONS = {
    "model": {"s", "amplitude", "form"},
    "N": None,
    "initial": {"kind", "coefficients", "n", "amplitude", "center", "width", "norm", "n_perp"},
    "time": {"t_end", "n_points", "spacing"},
    "delta": None,
    "quadrature": {"abs_tol", "rel_tol", "max_subdivisions", "grading_exponent", "nodes_per_panel"},
    "output": None,
    "verify": {"fourier", "exponent_fit"},
    "seed": None,
}

_INITIAL_KINDS = {"coefficients", "mode", "gaussian_bump", "random"}


@dataclass(frozen=True)
class RunConfig:
    model: SingularityModel = SingularityModel()
    N: int = 32
    initial: dict = field(default_factory=lambda: {"kind": "mode", "n": 2, "amplitude": 0.05})
    t_end: float = 5.0
    n_points: int = 51
    spacing: str = "linear"
    delta: float = 0.5
    quad: QuadratureSpec = QuadratureSpec()
    output: str = "radboltz-run"
    verify_fourier: bool = True
    verify_exponent_fit: bool = True
    seed: int = 0

    def time_grid(self):
        if self.spacing == "linear":
            return np.linspace(0.0, self.t_end, self.n_points)
        return np.concatenate([[0.0], np.geomspace(self.t_end * 1e-3, self.t_end, self.n_points - 1)])

    def resolved(self):
        """Plain-data form with every default filled in."""
        return {
            "model": self.model.as_dict(),
            "N": self.N,
            "initial": dict(self.initial),
            "time": {"t_end": self.t_end, "n_points": self.n_points, "spacing": self.spacing},
            "delta": self.delta,
            "quadrature": self.quad.as_dict(),
            "output": self.output,
            "verify": {"fourier": self.verify_fourier, "exponent_fit": self.verify_exponent_fit},
            "seed": self.seed,
        }


def load_text(text, source="<config>"):
    """Parse YAML (a superset of JSON) and report the failing line."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{source}:{where}: {getattr(exc, 'problem', exc)}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return data


def load_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return from_dict(load_text(text, str(path)), str(path))


def _section(data, key, source):
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{source}: field '{key}' must be a mapping")
    unknown = set(value) - _SECTIONS[key]
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {sorted(unknown)} in '{key}'")
    return value


def _number(value, field_name, source, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{source}: field '{field_name}' must be a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{source}: field '{field_name}' must be an integer, got {value!r}")
    return kind(value)


def from_dict(data, source="<config>"):
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {sorted(unknown)}")
    defaults = RunConfig()
    try:
        model = SingularityModel(**_section(data, "model", source))
        quad = QuadratureSpec(**_section(data, "quadrature", source))
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    N = _number(data.get("N", defaults.N), "N", source, int)
    if N < 2:
        raise ConfigError(f"{source}: field 'N' must be >= 2")
    initial = dict(_section(data, "initial", source) or defaults.initial)
    kind = initial.get("kind")
    if kind not in _INITIAL_KINDS:
        raise ConfigError(f"{source}: field 'initial.kind' must be one of {sorted(_INITIAL_KINDS)}")
    if kind == "coefficients":
        coeffs = initial.get("coefficients")
        if not isinstance(coeffs, list) or len(coeffs) > N + 1:
            raise ConfigError(f"{source}: 'initial.coefficients' must be a list of at most N + 1 numbers")
        initial["coefficients"] = [_number(c, "initial.coefficients", source) for c in coeffs]
    if kind == "mode":
        n = _number(initial.get("n", 2), "initial.n", source, int)
        if not 0 <= n <= N:
            raise ConfigError(f"{source}: 'initial.n' must lie in 0..N")
    time = _section(data, "time", source)
    t_end = _number(time.get("t_end", defaults.t_end), "time.t_end", source)
    n_points = _number(time.get("n_points", defaults.n_points), "time.n_points", source, int)
    spacing = time.get("spacing", defaults.spacing)
    if not t_end > 0:
        raise ConfigError(f"{source}: field 'time.t_end' must be positive")
    if n_points < 2:
        raise ConfigError(f"{source}: field 'time.n_points' must be >= 2")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"{source}: field 'time.spacing' must be 'linear' or 'log'")
    delta = _number(data.get("delta", defaults.delta), "delta", source)
    if not 0 < delta < 1:
        raise ConfigError(f"{source}: field 'delta' must lie in (0, 1)")
    seed = _number(data.get("seed", defaults.seed), "seed", source, int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"{source}: field 'seed' must be an unsigned 64-bit integer")
    output = data.get("output", defaults.output)
    if not isinstance(output, str):
        raise ConfigError(f"{source}: field 'output' must be a path string")
    ver = _section(data, "verify", source)
    return RunConfig(model, N, initial, t_end, n_points, spacing, delta, quad, output,
                     bool(ver.get("fourier", True)), bool(ver.get("exponent_fit", True)), seed)


def dumps(data):
    """Structured text with stable key order."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
