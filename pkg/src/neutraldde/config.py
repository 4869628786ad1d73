"""Declarative run configuration: flat sectioned key-value text.

A run is described by five sections; every key is validated against the
schema below, unknown keys are errors, and messages carry the offending line
number where one can be found.

::

    [operator]
    type = dirichlet_sine        # or: explicit
    n_modes = 8
    length = 3.141592653589793   # dirichlet_sine: interval length
    mu = 1.0 4.0 9.0             # explicit: decay rates, nondecreasing
    gap = 1.0                    # optional; must equal the smallest rate

    [problem]
    h = 1.0                      # delay span
    T = 2.0                      # horizon; dt must divide both
    alpha = 0.5                  # fractional exponent of the neutral norm
    mg_bound = 0.07              # declared contraction budget, < 1
    domain = delay_mass          # delay_mass | sup_band | time_only
    l = 1.0                      # band width (band domains)
    g_family = affine            # zero | affine | point_delay | time_forcing
    g_functional = integral      # integral | max        (affine)
    g_c0 = 0.0                   # affine: value c0 + c1*y
    g_c1 = 0.05
    g_profile = sine:1:1.0       # sine:k:amp | modes:v1 v2 ...
    g_y_max = 1.0                # argument cap of the scalar map; for runs
                                 # that exit through a band edge give the
                                 # cap headroom beyond l (the crossing
                                 # window evaluates slightly past the edge)
    g_window = full              # full | current | affine:b0,b1,a0,a1  (max)
    g_kappa = 0.25               # point_delay weight
    g_fns = const:0.0            # time_forcing: per-mode, ';'-separated
    f_family = ...               # same keys with the f_ prefix

    [initial]
    family = constant            # constant | exp | table
    coeffs = 0.3 0 0             # constant: one value per mode
    amps = 1.0                   # exp: phi_k(theta) = amp_k e^(rate_k theta)
    rates = -0.5
    table = ...                  # rows "theta v1 v2 ...", theta in [-h, 0]

    [solver]
    dt = 1e-2
    window = 0.5
    tol = 1e-10
    max_iter = 200
    trust_radius = 100.0
    min_window =                 # optional, defaults to dt
    damping = 1.0
    boundary_tol =               # optional, defaults to 1e-9*l

    [output]
    csv = run.csv                # empty: no file written
    n_coeffs = 3                 # coefficient columns to emit
    diagnostics = true
"""

from __future__ import annotations

import configparser
import io
import re
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .history import Segment
from .problem import (
    DomainSpec,
    FunctionalAffineTerm,
    NeutralProblem,
    PointDelayTerm,
    TimeFn,
    TimeForcingTerm,
    WindowFns,
    ZeroTerm,
    current_value_window,
    full_history_window,
    sine_profile_coeffs,
)
from .solver import SolverConfig
from .spectral import SpectralOperator, make_dirichlet_laplacian

_SCHEMA = {
    "operator": {"type", "n_modes", "length", "mu", "gap"},
    "problem": {
        "h", "T", "alpha", "mg_bound", "domain", "l",
        "g_family", "g_functional", "g_c0", "g_c1", "g_profile", "g_y_max",
        "g_window", "g_kappa", "g_fns",
        "f_family", "f_functional", "f_c0", "f_c1", "f_profile", "f_y_max",
        "f_window", "f_kappa", "f_fns",
    },
    "initial": {"family", "coeffs", "amps", "rates", "table"},
    "solver": {
        "dt", "window", "tol", "max_iter", "trust_radius", "min_window",
        "damping", "boundary_tol",
    },
    "output": {"csv", "n_coeffs", "diagnostics"},
}
_REQUIRED_SECTIONS = ("operator", "problem", "initial", "solver")


@dataclass
class RunConfig:
    """Parsed and schema-checked configuration, still purely declarative."""

    raw: dict
    text: str

    def get(self, section: str, key: str, default=None) -> str | None:
        return self.raw.get(section, {}).get(key, default)


@dataclass
class BuiltRun:
    """Everything a run needs, constructed from a RunConfig."""

    problem: NeutralProblem
    initial_segment: Segment
    solver: SolverConfig
    csv_path: str | None
    n_coeffs: int
    diagnostics: bool


def _line_of(text: str, key: str, section: str) -> int | None:
    in_section = False
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
        elif in_section and re.match(rf"^{re.escape(key)}\s*[=:]", stripped):
            return i
    return None


def _fail(text: str, section: str, key: str, message: str) -> "SchemaError":
    line = _line_of(text, key, section)
    prefix = f"line {line}: " if line is not None else ""
    return SchemaError(f"{prefix}[{section}] {key}: {message}")


def parse_config(text: str) -> RunConfig:
    """Parse and schema-check configuration text."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (T vs t)
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise SchemaError(str(exc)) from exc
    raw: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise SchemaError(f"unknown section [{section}]")
        known = _SCHEMA[section]
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in known:
                raise _fail(text, section, key, "unknown key")
            raw[section][key] = value.strip()
    for section in _REQUIRED_SECTIONS:
        if section not in raw:
            raise SchemaError(f"missing required section [{section}]")
    return RunConfig(raw=raw, text=text)


def _parse_float(cfg: RunConfig, section: str, key: str, default=None, required=False):
    value = cfg.get(section, key)
    if value is None or value == "":
        if required:
            raise _fail(cfg.text, section, key, "required value missing")
        return default
    try:
        return float(value)
    except ValueError:
        raise _fail(cfg.text, section, key, f"not a number: {value!r}") from None


def _parse_int(cfg: RunConfig, section: str, key: str, default=None, required=False):
    value = cfg.get(section, key)
    if value is None or value == "":
        if required:
            raise _fail(cfg.text, section, key, "required value missing")
        return default
    try:
        return int(value)
    except ValueError:
        raise _fail(cfg.text, section, key, f"not an integer: {value!r}") from None


def _parse_floats(cfg: RunConfig, section: str, key: str, required=False):
    value = cfg.get(section, key)
    if value is None or value == "":
        if required:
            raise _fail(cfg.text, section, key, "required value missing")
        return None
    try:
        return np.array([float(v) for v in value.split()])
    except ValueError:
        raise _fail(cfg.text, section, key, f"not a number list: {value!r}") from None


def _parse_bool(cfg: RunConfig, section: str, key: str, default: bool) -> bool:
    value = cfg.get(section, key)
    if value is None or value == "":
        return default
    if value.lower() in ("true", "yes", "on", "1"):
        return True
    if value.lower() in ("false", "no", "off", "0"):
        return False
    raise _fail(cfg.text, section, key, f"not a boolean: {value!r}")


def _build_operator(cfg: RunConfig) -> SpectralOperator:
    kind = cfg.get("operator", "type", "dirichlet_sine")
    if kind == "dirichlet_sine":
        n_modes = _parse_int(cfg, "operator", "n_modes", required=True)
        length = _parse_float(cfg, "operator", "length", required=True)
        try:
            op = make_dirichlet_laplacian(n_modes, length)
        except ValueError as exc:
            raise SchemaError(f"[operator] {exc}") from exc
    elif kind == "explicit":
        mu = _parse_floats(cfg, "operator", "mu", required=True)
        try:
            op = SpectralOperator(mu)
        except ValueError as exc:
            raise SchemaError(f"[operator] {exc}") from exc
        n_modes = _parse_int(cfg, "operator", "n_modes")
        if n_modes is not None and n_modes != op.n_modes:
            raise _fail(cfg.text, "operator", "n_modes",
                        f"does not match the {op.n_modes} explicit rates")
    else:
        raise _fail(cfg.text, "operator", "type", f"unknown operator type {kind!r}")
    gap = _parse_float(cfg, "operator", "gap")
    if gap is not None and abs(gap - op.gap) > 1e-12 * max(1.0, op.gap):
        raise _fail(cfg.text, "operator", "gap",
                    f"declared gap {gap} must equal the smallest decay rate {op.gap}")
    return op


def _parse_profile(cfg: RunConfig, prefix: str, op: SpectralOperator) -> np.ndarray:
    spec = cfg.get("problem", f"{prefix}_profile")
    if spec is None or spec == "":
        raise _fail(cfg.text, "problem", f"{prefix}_profile", "required for the affine family")
    kind, _, rest = spec.partition(":")
    if kind == "modes":
        try:
            coeffs = np.array([float(v) for v in rest.split()])
        except ValueError:
            raise _fail(cfg.text, "problem", f"{prefix}_profile",
                        f"bad mode coefficients {rest!r}") from None
        if coeffs.size != op.n_modes:
            raise _fail(cfg.text, "problem", f"{prefix}_profile",
                        f"needs {op.n_modes} coefficients, got {coeffs.size}")
        return coeffs
    if kind == "sine":
        parts = rest.split(":")
        if len(parts) != 2:
            raise _fail(cfg.text, "problem", f"{prefix}_profile",
                        "sine profile is sine:<mode>:<amplitude>")
        try:
            k, amp = int(parts[0]), float(parts[1])
            return sine_profile_coeffs(op, k, amp)
        except ValueError as exc:
            raise _fail(cfg.text, "problem", f"{prefix}_profile", str(exc)) from None
    raise _fail(cfg.text, "problem", f"{prefix}_profile", f"unknown profile kind {kind!r}")


def _parse_window(cfg: RunConfig, prefix: str, h: float) -> WindowFns:
    spec = cfg.get("problem", f"{prefix}_window", "full")
    if spec in ("full", ""):
        return full_history_window(h)
    if spec == "current":
        return current_value_window()
    kind, _, rest = spec.partition(":")
    if kind == "affine":
        try:
            b0, b1, a0, a1 = (float(v) for v in rest.split(","))
            return WindowFns(b0, b1, a0, a1)
        except ValueError:
            raise _fail(cfg.text, "problem", f"{prefix}_window",
                        "affine window is affine:b0,b1,a0,a1") from None
    raise _fail(cfg.text, "problem", f"{prefix}_window", f"unknown window {spec!r}")


def _parse_time_fns(cfg: RunConfig, prefix: str, op: SpectralOperator) -> list[TimeFn]:
    spec = cfg.get("problem", f"{prefix}_fns")
    if spec is None or spec == "":
        raise _fail(cfg.text, "problem", f"{prefix}_fns",
                    "required for the time_forcing family")
    fns = []
    for part in spec.split(";"):
        part = part.strip()
        kind, _, rest = part.partition(":")
        try:
            params = tuple(float(v) for v in rest.split(",")) if rest else ()
            fns.append(TimeFn(kind, params))
        except ValueError as exc:
            raise _fail(cfg.text, "problem", f"{prefix}_fns", f"{part!r}: {exc}") from None
    if len(fns) != op.n_modes:
        raise _fail(cfg.text, "problem", f"{prefix}_fns",
                    f"needs {op.n_modes} per-mode functions, got {len(fns)}")
    return fns


def _build_term(cfg: RunConfig, prefix: str, op: SpectralOperator, h: float):
    family = cfg.get("problem", f"{prefix}_family", "zero")
    if family == "zero":
        return ZeroTerm()
    if family == "affine":
        functional = cfg.get("problem", f"{prefix}_functional", "integral")
        if functional not in ("integral", "max"):
            raise _fail(cfg.text, "problem", f"{prefix}_functional",
                        f"unknown functional {functional!r}")
        window = _parse_window(cfg, prefix, h) if functional == "max" else None
        return FunctionalAffineTerm(
            c0=_parse_float(cfg, "problem", f"{prefix}_c0", 0.0),
            c1=_parse_float(cfg, "problem", f"{prefix}_c1", 0.0),
            profile=_parse_profile(cfg, prefix, op),
            functional=functional,
            window=window,
            y_max=_parse_float(cfg, "problem", f"{prefix}_y_max"),
        )
    if family == "point_delay":
        kappa = _parse_float(cfg, "problem", f"{prefix}_kappa", required=True)
        return PointDelayTerm(kappa)
    if family == "time_forcing":
        return TimeForcingTerm(_parse_time_fns(cfg, prefix, op))
    raise _fail(cfg.text, "problem", f"{prefix}_family", f"unknown family {family!r}")


def _build_initial(cfg: RunConfig, op: SpectralOperator, h: float, dt: float) -> Segment:
    family = cfg.get("initial", "family", "constant")
    n_h = int(round(h / dt))
    thetas = -h + dt * np.arange(n_h + 1)
    if family == "constant":
        coeffs = _parse_floats(cfg, "initial", "coeffs", required=True)
        if coeffs.size != op.n_modes:
            raise _fail(cfg.text, "initial", "coeffs",
                        f"needs {op.n_modes} values, got {coeffs.size}")
        return Segment(h, thetas, np.tile(coeffs, (n_h + 1, 1)))
    if family == "exp":
        amps = _parse_floats(cfg, "initial", "amps", required=True)
        rates = _parse_floats(cfg, "initial", "rates", required=True)
        if amps.size != op.n_modes or rates.size != op.n_modes:
            raise _fail(cfg.text, "initial", "amps",
                        f"amps and rates both need {op.n_modes} values")
        values = amps[None, :] * np.exp(np.outer(thetas, rates))
        return Segment(h, thetas, values)
    if family == "table":
        raw = cfg.get("initial", "table")
        if not raw:
            raise _fail(cfg.text, "initial", "table", "required for the table family")
        rows = []
        for line in raw.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError:
                raise _fail(cfg.text, "initial", "table", f"bad row {line!r}") from None
        arr = np.array(rows)
        if arr.ndim != 2 or arr.shape[1] != op.n_modes + 1:
            raise _fail(cfg.text, "initial", "table",
                        f"rows must be theta plus {op.n_modes} values")
        try:
            table_seg = Segment(h, arr[:, 0], arr[:, 1:])
        except ValueError as exc:
            raise _fail(cfg.text, "initial", "table", str(exc)) from None
        values = np.vstack([table_seg.value_at(th) for th in thetas])
        return Segment(h, thetas, values)
    raise _fail(cfg.text, "initial", "family", f"unknown family {family!r}")


def build_run(cfg: RunConfig, dt_override: float | None = None) -> BuiltRun:
    """Construct the operator, problem, initial history, and solver settings.

    Schema-level problems raise SchemaError; hypothesis-level problems (a
    non-contractive declared budget) propagate as HypothesisViolation.
    """
    op = _build_operator(cfg)

    h = _parse_float(cfg, "problem", "h", required=True)
    T = _parse_float(cfg, "problem", "T", required=True)
    alpha = _parse_float(cfg, "problem", "alpha", 0.5)
    mg_bound = _parse_float(cfg, "problem", "mg_bound", required=True)
    domain_kind = cfg.get("problem", "domain", "time_only")
    l = _parse_float(cfg, "problem", "l")
    try:
        domain = DomainSpec(domain_kind, l)
    except ValueError as exc:
        raise _fail(cfg.text, "problem", "domain", str(exc)) from None

    g = _build_term(cfg, "g", op, h)
    f = _build_term(cfg, "f", op, h)

    dt = dt_override if dt_override is not None else _parse_float(
        cfg, "solver", "dt", required=True)
    window = _parse_float(cfg, "solver", "window", required=True)
    try:
        solver = SolverConfig(
            dt=dt,
            window=window,
            tol=_parse_float(cfg, "solver", "tol", 1e-10),
            max_iter=_parse_int(cfg, "solver", "max_iter", 200),
            trust_radius=_parse_float(cfg, "solver", "trust_radius", 100.0),
            min_window=_parse_float(cfg, "solver", "min_window"),
            damping=_parse_float(cfg, "solver", "damping", 1.0),
            boundary_tol=_parse_float(cfg, "solver", "boundary_tol"),
        )
        solver.validate_delay(h)
        ratio = T / dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"dt={dt} must divide the horizon T={T}")
    except ValueError as exc:
        raise SchemaError(f"[solver] {exc}") from exc

    if h <= 0 or T <= 0:
        raise SchemaError("[problem] h and T must be positive")
    problem = NeutralProblem(op, h, T, alpha, g, f, domain, mg_bound)
    initial = _build_initial(cfg, op, h, solver.dt)

    n_coeffs = _parse_int(cfg, "output", "n_coeffs", op.n_modes)
    return BuiltRun(
        problem=problem,
        initial_segment=initial,
        solver=solver,
        csv_path=cfg.get("output", "csv") or None,
        n_coeffs=n_coeffs,
        diagnostics=_parse_bool(cfg, "output", "diagnostics", True),
    )
