"""Command-line entry point.

Subcommands: ``chsh``, ``mermin``, ``gisin``, ``hierarchy``, ``povm-check``,
``scan`` (YAML-configured sweeps) and ``reproduce`` (every headline number
with a pass/fail verdict).

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from . import inequalities as ineq
from . import search
from .pauli_core import (
    DensityMatrix,
    Direction,
    NormalizationError,
    X,
    Y,
    Z,
    ghz_state,
    maximally_mixed,
    random_mixed_state,
    random_pure_state,
    singlet_state,
)
from .povm import (
    InfeasibleMeasurementError,
    build_joint_povm2,
    build_joint_povm3,
    busch_margin,
    max_symmetric_sharpness,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

CSV_HEADER = ("scenario", "regime", "value", "classical_bound", "quantum_bound", "violated", "residual")
INV_SQRT2 = 1.0 / math.sqrt(2.0)
INV_SQRT3 = 1.0 / math.sqrt(3.0)


class ConfigError(ValueError):
    """Invalid scenario configuration; ``errors`` holds one message per offending field."""

    def __init__(self, errors: Sequence[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# --- rows and output ------------------------------------------------------


def fmt_number(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


@dataclass
class ReportRow:
    scenario: str
    regime: str
    value: float
    classical_bound: float | None = None
    quantum_bound: float | None = None
    violated: bool | None = None
    residual: float | None = None
    expected: float | None = field(default=None, compare=False)
    tolerance: float | None = field(default=None, compare=False)

    @classmethod
    def from_report(cls, report: ineq.InequalityReport, scenario: str | None = None, **kw: Any) -> ReportRow:
        return cls(
            scenario=scenario or report.name,
            regime=report.regime,
            value=report.value,
            classical_bound=report.classical_bound,
            quantum_bound=report.quantum_bound,
            violated=report.violated,
            **kw,
        )

    @property
    def passed(self) -> bool | None:
        if self.expected is None or self.tolerance is None:
            return None
        return self.residual is not None and self.residual <= self.tolerance

    def csv_fields(self) -> list[str]:
        violated = "" if self.violated is None else ("true" if self.violated else "false")
        return [
            self.scenario,
            self.regime,
            fmt_number(self.value),
            fmt_number(self.classical_bound),
            fmt_number(self.quantum_bound),
            violated,
            fmt_number(self.residual),
        ]


def render_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def render_table(rows: Sequence[ReportRow]) -> str:
    with_status = any(r.passed is not None for r in rows)
    header = list(CSV_HEADER)
    if with_status:
        header += ["expected", "status"]
    body = []
    for r in rows:
        line = r.csv_fields()
        if with_status:
            status = "" if r.passed is None else ("PASS" if r.passed else "FAIL")
            line += [fmt_number(r.expected), status]
        body.append(line)
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    out.append("  ".join("-" * w for w in widths))
    for b in body:
        out.append("  ".join(c.ljust(w) for c, w in zip(b, widths)).rstrip())
    return "\n".join(out) + "\n"


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def emit(rows: Sequence[ReportRow], fmt: str, out: str | None) -> None:
    text = render_csv(rows) if fmt == "csv" else render_table(rows)
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


# --- direction and state parsing ------------------------------------------

_AXES = {"x": X, "y": Y, "z": Z}


def parse_direction(value: Any, name: str = "direction") -> Direction:
    """Axis name (``x``, ``-y``), comma-separated triple or 3-element list, normalized."""
    if isinstance(value, Direction):
        return value
    if isinstance(value, str):
        text = value.strip().lower()
        sign = -1 if text.startswith("-") else 1
        axis = text.lstrip("+-")
        if axis in _AXES:
            return _AXES[axis] if sign > 0 else -_AXES[axis]
        parts = [p for p in text.replace(" ", "").split(",") if p]
        try:
            value = [float(p) for p in parts]
        except ValueError:
            raise ConfigError([f"{name}: cannot parse direction {value!r}"]) from None
    try:
        comps = [float(c) for c in value]
    except (TypeError, ValueError):
        raise ConfigError([f"{name}: expected an axis name or three numbers, got {value!r}"]) from None
    if len(comps) != 3:
        raise ConfigError([f"{name}: expected three components, got {len(comps)}"])
    try:
        return Direction.from_vector(comps)
    except NormalizationError:
        raise ConfigError([f"{name}: direction {comps} cannot be normalized to unit length"]) from None


def parse_state(text: str, n_qubits: int, name: str = "state") -> DensityMatrix:
    """``singlet``, ``ghz``, ``mixed``, ``random:SEED`` or ``random-mixed:SEED``."""
    text = str(text).strip()
    kind, _, arg = text.partition(":")
    try:
        if kind == "singlet" and not arg:
            state = singlet_state()
        elif kind == "ghz" and not arg:
            state = ghz_state()
        elif kind == "mixed" and not arg:
            state = maximally_mixed(n_qubits)
        elif kind == "random":
            state = random_pure_state(n_qubits, int(arg))
        elif kind == "random-mixed":
            state = random_mixed_state(n_qubits, int(arg))
        else:
            raise ConfigError([f"{name}: unknown state {text!r}"])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([f"{name}: {exc}"]) from None
    if state.n_qubits != n_qubits:
        raise ConfigError([f"{name}: {text!r} has {state.n_qubits} qubits, scenario needs {n_qubits}"])
    return state


# --- presets and scenarios ------------------------------------------------

PRESETS: dict[str, dict[str, Direction]] = {
    "xy": {"a": X, "b": Y},
    "chsh-optimal": dict(zip(("a1", "b1", "a2", "b2"), ineq.CHSH_OPTIMAL)),
    "ghz-xy": dict(zip(("x1", "x2", "x3", "y1", "y2", "y3"), ineq.GHZ_X + ineq.GHZ_Y)),
    "gisin-coplanar": dict(zip(("a1", "b1", "c1", "a2", "b2", "c2"), ineq.GISIN_COPLANAR)),
    "xyz-octahedral": dict(zip(("a1", "b1", "c1", "d1", "a2", "b2", "c2"), ineq.XYZ_PARTY1 + ineq.XYZ_PARTY2)),
    "xyz": {"a": X, "b": Y, "c": Z},
}


@dataclass(frozen=True)
class ScenarioKind:
    n_qubits: int
    default_state: str
    regime: str
    default_preset: str
    labels: tuple[str, ...]
    sharpness: dict[str, float | None]
    configurable_labels: tuple[str, ...] | None = None


SCENARIOS: dict[str, ScenarioKind] = {
    "chsh": ScenarioKind(2, "singlet", "sharp", "chsh-optimal", ("a1", "b1", "a2", "b2"), {}),
    "mermin": ScenarioKind(3, "ghz", "sharp", "ghz-xy", ("x1", "x2", "x3", "y1", "y2", "y3"), {}),
    "mermin_joint": ScenarioKind(
        3,
        "ghz",
        "joint-on-two",
        "ghz-xy",
        ("x1", "x2", "x3", "y1", "y2", "y3"),
        {"alpha": None, "beta": None, "alpha1": INV_SQRT2, "beta1": INV_SQRT2, "alpha2": INV_SQRT2, "beta2": INV_SQRT2},
    ),
    "gisin3": ScenarioKind(2, "singlet", "sharp", "gisin-coplanar", ("a1", "b1", "c1", "a2", "b2", "c2"), {}),
    "gisin4": ScenarioKind(2, "singlet", "sharp", "xyz-octahedral", ("a1", "b1", "c1", "d1", "a2", "b2", "c2"), {}),
    "gisin3_joint": ScenarioKind(
        2,
        "singlet",
        "joint-on-one",
        "gisin-coplanar",
        ("a1", "b1", "c1", "a2", "b2", "c2"),
        {"alpha": None},
        configurable_labels=("a1", "b1", "c1"),
    ),
    "gisin_xyz_joint": ScenarioKind(
        2,
        "singlet",
        "joint-on-one",
        "xyz-octahedral",
        ("a1", "b1", "c1", "d1", "a2", "b2", "c2"),
        {"alpha": INV_SQRT3, "beta": None, "gamma": None},
        configurable_labels=(),
    ),
    "povm_check": ScenarioKind(
        1, "mixed", "joint-on-one", "xy", ("a", "b", "c"), {"alpha": INV_SQRT2, "beta": INV_SQRT2, "gamma": None}
    ),
}

CONFIG_KEYS = {"scenario", "state", "regime", "directions", "sharpness", "sweep", "format", "output", "seed"}
SWEEP_KEYS = {"parameter", "start", "stop", "step", "values"}


@dataclass
class ScenarioConfig:
    scenario: str
    state: str
    regime: str
    directions: dict[str, Direction]
    sharpness: dict[str, float | None]
    sweep_parameter: str | None = None
    sweep_values: list[float] = field(default_factory=list)
    format: str = "table"
    output: str | None = None
    seed: int = 0

    @property
    def kind(self) -> ScenarioKind:
        return SCENARIOS[self.scenario]


def _grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError("stop is below start")
    return [float(f"{start + i * step:.12g}") for i in range(n)]


def validate_config(data: Any) -> ScenarioConfig:
    """Validate a parsed config mapping; collects every field error before raising."""
    if not isinstance(data, dict):
        raise ConfigError(["<root>: expected a mapping of configuration keys"])
    errors: list[str] = []
    for key in sorted(set(data) - CONFIG_KEYS):
        errors.append(f"{key}: unknown key")

    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        errors.append(f"scenario: expected one of {', '.join(SCENARIOS)}, got {scenario!r}")
        raise ConfigError(errors)
    kind = SCENARIOS[scenario]

    state = str(data.get("state", kind.default_state))
    try:
        parse_state(state, kind.n_qubits)
    except ConfigError as exc:
        errors.extend(exc.errors)

    regime = data.get("regime", kind.regime)
    if regime != kind.regime:
        errors.append(f"regime: scenario {scenario} runs in regime {kind.regime!r}, got {regime!r}")

    directions = dict(PRESETS[kind.default_preset])
    raw_dirs = data.get("directions")
    allowed = kind.labels if kind.configurable_labels is None else kind.configurable_labels
    if isinstance(raw_dirs, str):
        if raw_dirs not in PRESETS:
            errors.append(f"directions: unknown preset {raw_dirs!r}")
        elif not set(kind.labels) >= set(PRESETS[raw_dirs]) or (
            kind.configurable_labels is not None and raw_dirs != kind.default_preset
        ):
            errors.append(f"directions: preset {raw_dirs!r} does not fit scenario {scenario}")
        else:
            directions.update(PRESETS[raw_dirs])
    elif isinstance(raw_dirs, dict):
        for label, value in raw_dirs.items():
            if label not in allowed:
                errors.append(f"directions.{label}: not a configurable direction of {scenario}")
                continue
            try:
                directions[label] = parse_direction(value, f"directions.{label}")
            except ConfigError as exc:
                errors.extend(exc.errors)
    elif raw_dirs is not None:
        errors.append("directions: expected a preset name or a mapping of label to direction")

    sharpness = dict(kind.sharpness)
    raw_sharp = data.get("sharpness", {}) or {}
    if not isinstance(raw_sharp, dict):
        errors.append("sharpness: expected a mapping")
        raw_sharp = {}
    for key, value in raw_sharp.items():
        if key not in sharpness:
            errors.append(f"sharpness.{key}: unknown factor for {scenario}")
            continue
        try:
            v = float(value)
        except (TypeError, ValueError):
            errors.append(f"sharpness.{key}: expected a number, got {value!r}")
            continue
        if not 0.0 <= v <= 1.0:
            errors.append(f"sharpness.{key}: {v} outside [0, 1]")
        sharpness[key] = v

    sweep_parameter = None
    sweep_values: list[float] = []
    raw_sweep = data.get("sweep")
    if raw_sweep is not None:
        if not isinstance(raw_sweep, dict):
            errors.append("sweep: expected a mapping")
        else:
            for key in sorted(set(raw_sweep) - SWEEP_KEYS):
                errors.append(f"sweep.{key}: unknown key")
            sweep_parameter = raw_sweep.get("parameter")
            if sweep_parameter not in sharpness:
                errors.append(f"sweep.parameter: {sweep_parameter!r} is not a sharpness factor of {scenario}")
            try:
                if "values" in raw_sweep:
                    sweep_values = [float(v) for v in raw_sweep["values"]]
                else:
                    sweep_values = _grid(float(raw_sweep["start"]), float(raw_sweep["stop"]), float(raw_sweep["step"]))
            except KeyError as exc:
                errors.append(f"sweep.{exc.args[0]}: required unless 'values' is given")
            except (TypeError, ValueError) as exc:
                errors.append(f"sweep: {exc}")
            for v in sweep_values:
                if not 0.0 <= v <= 1.0:
                    errors.append(f"sweep: value {v} outside [0, 1]")
                    break

    fmt = data.get("format", "table")
    if fmt not in ("table", "csv"):
        errors.append(f"format: expected 'table' or 'csv', got {fmt!r}")
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        errors.append("output: expected a path string")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        errors.append(f"seed: expected an integer, got {seed!r}")
        seed = 0

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        scenario=scenario,
        state=state,
        regime=regime,
        directions=directions,
        sharpness=sharpness,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        format=fmt,
        output=output,
        seed=seed,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a YAML scenario file.

    Raises
    ------
    ConfigError
        On unreadable files, YAML syntax errors and every schema violation.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"<file>: {exc}"]) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<parse>: {exc}"]) from None
    return validate_config(data)


def _mermin_joint_factors(sharp: dict[str, float | None]) -> tuple[float, float, float, float]:
    a1 = sharp["alpha"] if sharp.get("alpha") is not None else sharp["alpha1"]
    a2 = sharp["alpha"] if sharp.get("alpha") is not None else sharp["alpha2"]
    b1 = sharp["beta"] if sharp.get("beta") is not None else sharp["beta1"]
    b2 = sharp["beta"] if sharp.get("beta") is not None else sharp["beta2"]
    return a1, b1, a2, b2


def evaluate_scenario(cfg: ScenarioConfig, sharpness: dict[str, float | None] | None = None, label: str | None = None) -> ReportRow:
    """Evaluate one point of a scenario; ``sharpness`` overrides the config's factors."""
    kind = cfg.kind
    sharp = dict(cfg.sharpness if sharpness is None else sharpness)
    d = cfg.directions
    name = label or cfg.scenario
    if cfg.scenario == "povm_check":
        return povm_check_row(sharp["alpha"], d["a"], sharp["beta"], d["b"], sharp.get("gamma"), d.get("c"), name)
    rho = parse_state(cfg.state, kind.n_qubits)
    if cfg.scenario == "chsh":
        return ReportRow.from_report(ineq.chsh_value(rho, d["a1"], d["b1"], d["a2"], d["b2"]), name)
    if cfg.scenario == "mermin":
        rep = ineq.mermin_value(rho, (d["x1"], d["x2"], d["x3"]), (d["y1"], d["y2"], d["y3"]))
        return ReportRow.from_report(rep, name)
    if cfg.scenario == "mermin_joint":
        a1, b1, a2, b2 = _mermin_joint_factors(sharp)
        povm1 = build_joint_povm2(a1, d["x1"], b1, d["y1"])
        povm2 = build_joint_povm2(a2, d["x2"], b2, d["y2"])
        rep = ineq.mermin_joint_value(rho, povm1, povm2, (d["x3"], d["y3"]))
        residual = None
        if cfg.state == "ghz" and all(d[k] == v for k, v in PRESETS["ghz-xy"].items()):
            residual = abs(rep.value - ineq.mermin_joint_closed_form(a1, b1, a2, b2))
        return ReportRow.from_report(rep, name, residual=residual)
    if cfg.scenario == "gisin3":
        return ReportRow.from_report(ineq.gisin3_value(rho, *(d[k] for k in kind.labels)), name)
    if cfg.scenario == "gisin4":
        return ReportRow.from_report(ineq.gisin4_value(rho, *(d[k] for k in kind.labels)), name)
    if cfg.scenario == "gisin3_joint":
        a2, _, c2 = ineq.GISIN_COPLANAR_PARTY2
        alpha = sharp["alpha"] if sharp.get("alpha") is not None else max_symmetric_sharpness(a2, c2)
        party1 = (d["a1"], d["b1"], d["c1"])
        rep = ineq.gisin3_joint_value(rho, alpha, party1)
        residual = None
        if cfg.state == "singlet" and party1 == ineq.GISIN_COPLANAR_PARTY1:
            residual = abs(rep.value - alpha * ineq.gisin3_value(rho, *ineq.GISIN_COPLANAR).value)
        return ReportRow.from_report(rep, name, residual=residual)
    if cfg.scenario == "gisin_xyz_joint":
        alpha = sharp["alpha"]
        beta = sharp.get("beta") if sharp.get("beta") is not None else alpha
        gamma = sharp.get("gamma") if sharp.get("gamma") is not None else alpha
        value = ineq.gisin_xyz_joint_value(alpha, beta, gamma)
        closed = 4.0 * (alpha + beta + gamma) / math.sqrt(3.0)
        return ReportRow(
            name, "joint-on-one", value, ineq.GISIN4_CLASSICAL, ineq.GISIN_XYZ_JOINT_CEILING,
            value > ineq.GISIN4_CLASSICAL + 1e-10, abs(value - closed),
        )  # fmt: skip
    raise ConfigError([f"scenario: {cfg.scenario!r} is not runnable"])


def run_config(cfg: ScenarioConfig) -> list[ReportRow]:
    if not cfg.sweep_parameter:
        return [evaluate_scenario(cfg)]
    rows = []
    for v in cfg.sweep_values:
        sharp = dict(cfg.sharpness)
        sharp[cfg.sweep_parameter] = v
        rows.append(evaluate_scenario(cfg, sharp, f"{cfg.scenario}[{cfg.sweep_parameter}={fmt_number(v)}]"))
    return rows


def povm_check_row(
    alpha: float,
    a: Direction,
    beta: float,
    b: Direction,
    gamma: float | None = None,
    c: Direction | None = None,
    name: str = "povm_check",
    tol: float = 1e-10,
) -> ReportRow:
    """Feasibility and invariant residuals of a joint POVM.

    ``value`` is the slack of the feasibility condition and ``violated`` flags
    an infeasible request. ``residual`` is the worst invariant deviation. The
    row passes iff that residual is within ``tol``.
    """
    if gamma is None:
        margin = busch_margin(alpha, a, beta, b).value
        try:
            residual = max(build_joint_povm2(alpha, a, beta, b).residuals().values())
        except InfeasibleMeasurementError:
            residual = math.inf
    else:
        if c is None:
            raise ConfigError(["directions.c: required when gamma is given"])
        margin = 1.0 - (alpha**2 + beta**2 + gamma**2)
        try:
            residual = max(build_joint_povm3(alpha, beta, gamma, a, b, c).residuals().values())
        except InfeasibleMeasurementError:
            residual = math.inf
    feasible = math.isfinite(residual)
    return ReportRow(
        scenario=name,
        regime="joint-on-one",
        value=margin,
        classical_bound=0.0,
        quantum_bound=None,
        violated=not feasible,
        residual=residual if feasible else None,
        expected=0.0,
        tolerance=tol,
    )


def _povm_row_passed(row: ReportRow) -> bool:
    return row.residual is not None and row.residual <= (row.tolerance or 1e-10)


# --- reproduce ------------------------------------------------------------

CLOSED_TOL = 1e-10
OPTIMIZER_TOL = 1e-6


def _mermin_grid_deviation() -> float:
    """Largest |enumerated - (a1+b1)(a2+b2)| over a 5x5x5x5 feasible grid."""
    ghz = ghz_state()
    pairs = [(r * math.cos(t), r * math.sin(t)) for r in np.linspace(0.2, 1.0, 5) for t in np.linspace(0, math.pi / 2, 5)]
    povms = [build_joint_povm2(a, X, b, Y) for a, b in pairs]
    worst = 0.0
    for (a1, b1), p1 in zip(pairs, povms):
        for (a2, b2), p2 in zip(pairs, povms):
            value = ineq.mermin_joint_value(ghz, p1, p2).value
            worst = max(worst, abs(value - ineq.mermin_joint_closed_form(a1, b1, a2, b2)))
    return worst


def reproduce_rows(seed: int = 0, tolerance: float | None = None) -> list[ReportRow]:
    """Every headline number with its expected closed form."""
    singlet, ghz = singlet_state(), ghz_state()
    s2, s3 = math.sqrt(2.0), math.sqrt(3.0)
    rows: list[ReportRow] = []

    def add(row: ReportRow, expected: float, tol: float) -> None:
        row.expected = expected
        row.tolerance = tolerance if tolerance is not None else tol
        row.residual = abs(row.value - expected)
        rows.append(row)

    add(ReportRow.from_report(ineq.chsh_value(singlet, *ineq.CHSH_OPTIMAL), "chsh_singlet"), 2 * s2, CLOSED_TOL)
    res = ineq.optimize_chsh(singlet, seed=seed)
    add(ReportRow("chsh_optimized", "sharp", res.best_value, 2.0, ineq.TSIRELSON, res.best_value > 2 + 1e-10), 2 * s2, OPTIMIZER_TOL)

    add(ReportRow.from_report(ineq.mermin_value(ghz), "mermin_ghz"), 4.0, CLOSED_TOL)
    p = build_joint_povm2(INV_SQRT2, X, INV_SQRT2, Y)
    add(ReportRow.from_report(ineq.mermin_joint_value(ghz, p, p), "mermin_joint_symmetric"), 2.0, CLOSED_TOL)
    res = search.maximize_joint_regime("mermin_joint", seed=seed)
    add(ReportRow("mermin_joint_optimized", "joint-on-two", res.best_value, 2.0, 2.0, res.best_value > 2 + 1e-10), 2.0, 1e-8)
    add(ReportRow("mermin_joint_closed_form_grid", "joint-on-two", _mermin_grid_deviation()), 0.0, CLOSED_TOL)

    for regime, expected, tol in (("joint-on-two", 2.0, OPTIMIZER_TOL), ("joint-on-one", 2 * s2, OPTIMIZER_TOL), ("sharp", 4.0, CLOSED_TOL)):
        value = ineq.ghz_hierarchy(regime, seed=seed)
        add(ReportRow("ghz_hierarchy", regime, value, 2.0, 4.0, value > 2 + 1e-10), expected, tol)

    g3 = ineq.gisin3_value(singlet, *ineq.GISIN_COPLANAR)
    add(ReportRow.from_report(g3, "gisin3_coplanar"), 6.0, CLOSED_TOL)
    add(ReportRow("gisin3_ratio", "sharp", g3.ratio), 6.0 / 5.0, CLOSED_TOL)
    g4 = ineq.gisin4_value(singlet, *ineq.XYZ_PARTY1, *ineq.XYZ_PARTY2)
    add(ReportRow.from_report(g4, "gisin4_xyz"), 4 * s3, CLOSED_TOL)
    add(ReportRow("gisin4_ratio", "sharp", g4.ratio), 4 * s3 / 6.0, CLOSED_TOL)

    alpha_max = max_symmetric_sharpness(ineq.GISIN_COPLANAR_PARTY2[0], ineq.GISIN_COPLANAR_PARTY2[2])
    add(ReportRow.from_report(ineq.gisin3_joint_value(singlet, alpha_max), "gisin3_joint_ceiling"), 12 / (1 + s3), CLOSED_TOL)
    res = search.maximize_joint_regime("gisin3_joint", seed=seed)
    add(ReportRow("gisin3_joint_optimized", "joint-on-one", res.best_value, 5.0, 12 / (1 + s3), res.best_value > 5 + 1e-10), 12 / (1 + s3), CLOSED_TOL)

    add(ReportRow.from_report(ineq.gisin_xyz_joint_report(INV_SQRT3), "gisin_xyz_joint"), 4.0, CLOSED_TOL)
    add(ReportRow.from_report(ineq.gisin_xyz_joint_report(0.5), "gisin_xyz_joint_half"), 2 * s3, CLOSED_TOL)
    res = search.maximize_joint_regime("gisin_xyz_joint", seed=seed)
    add(ReportRow("gisin_xyz_joint_optimized", "joint-on-one", res.best_value, 6.0, 4.0, res.best_value > 6 + 1e-10), 4.0, OPTIMIZER_TOL)
    return rows


# --- argument handling ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--format", choices=("table", "csv"), default=default if suppress else "table")
    parser.add_argument("--out", metavar="PATH", default=default)
    parser.add_argument("--seed", type=int, default=default if suppress else 0)
    parser.add_argument("--tolerance", type=float, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jointbell", description="Bell inequalities under sharp and unsharp joint spin measurements.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        return p

    p = add("chsh", "CHSH value on a two-qubit state")
    p.add_argument("--state", default="singlet")
    p.add_argument("--directions", nargs=4, metavar=("A1", "B1", "A2", "B2"))
    p.add_argument("--optimize", action="store_true", help="maximize over all four directions")
    p.add_argument("--budget", type=int, default=search.DEFAULT_BUDGET)
    p.add_argument("--restarts", type=int, default=search.DEFAULT_RESTARTS)

    p = add("mermin", "Mermin value on a three-qubit state")
    p.add_argument("--state", default="ghz")
    p.add_argument("--joint", action="store_true", help="x/y joint measurements on parties 1 and 2")
    for name in ("alpha1", "beta1", "alpha2", "beta2"):
        p.add_argument(f"--{name}", type=float, default=INV_SQRT2)
    p.add_argument("--optimize", action="store_true", help="maximize (sharp: over directions; joint: over sharpness)")

    p = add("gisin", "Gisin three-setting expressions on a two-qubit state")
    p.add_argument("--variant", choices=("3", "4", "3-joint", "xyz-joint"), default="3")
    p.add_argument("--state", default="singlet")
    p.add_argument("--alpha", type=float)

    p = add("hierarchy", "GHZ expression in the joint-on-two / joint-on-one / sharp regimes")
    p.add_argument("--regime", choices=("all", "sharp", "joint-on-one", "joint-on-two"), default="all")

    p = add("povm-check", "check joint measurability and POVM invariants")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--a", default="x")
    p.add_argument("--b", default="y")
    p.add_argument("--c", default="z")

    p = add("scan", "run a YAML scenario file")
    p.add_argument("--config", required=True, metavar="PATH")

    add("reproduce", "recompute every headline number and report PASS/FAIL")
    return parser


def _cmd_chsh(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    rho = parse_state(args.state, 2, "--state")
    if args.optimize:
        res = ineq.optimize_chsh(rho, budget=args.budget, restarts=args.restarts, seed=args.seed)
        dirs = [sp.to_direction() for sp in res.directions]
        rep = ineq.chsh_value(rho, *dirs)
        return [ReportRow.from_report(rep, "chsh_optimized")], EXIT_OK
    dirs = ineq.CHSH_OPTIMAL if args.directions is None else [parse_direction(d, "--directions") for d in args.directions]
    return [ReportRow.from_report(ineq.chsh_value(rho, *dirs))], EXIT_OK


def _cmd_mermin(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    rho = parse_state(args.state, 3, "--state")
    if args.joint and args.optimize:
        res = search.maximize_joint_regime("mermin_joint", seed=args.seed)
        return [ReportRow("mermin_joint_optimized", "joint-on-two", res.best_value, 2.0, 2.0, res.best_value > 2 + 1e-10)], EXIT_OK
    if args.joint:
        povm1 = build_joint_povm2(args.alpha1, X, args.beta1, Y)
        povm2 = build_joint_povm2(args.alpha2, X, args.beta2, Y)
        return [ReportRow.from_report(ineq.mermin_joint_value(rho, povm1, povm2))], EXIT_OK
    if args.optimize:
        res = ineq.optimize_mermin(rho, seed=args.seed)
        return [ReportRow("mermin_optimized", "sharp", res.best_value, 2.0, 4.0, res.best_value > 2 + 1e-10)], EXIT_OK
    return [ReportRow.from_report(ineq.mermin_value(rho))], EXIT_OK


def _cmd_gisin(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    rho = parse_state(args.state, 2, "--state")
    if args.variant == "3":
        rep = ineq.gisin3_value(rho, *ineq.GISIN_COPLANAR)
    elif args.variant == "4":
        rep = ineq.gisin4_value(rho, *ineq.XYZ_PARTY1, *ineq.XYZ_PARTY2)
    elif args.variant == "3-joint":
        a2, _, c2 = ineq.GISIN_COPLANAR_PARTY2
        alpha = max_symmetric_sharpness(a2, c2) if args.alpha is None else args.alpha
        rep = ineq.gisin3_joint_value(rho, alpha)
    else:
        if args.state != "singlet":
            raise ConfigError(["--state: the xyz joint variant is defined on the singlet only"])
        rep = ineq.gisin_xyz_joint_report(INV_SQRT3 if args.alpha is None else args.alpha)
    return [ReportRow.from_report(rep)], EXIT_OK


def _cmd_hierarchy(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    regimes = ("joint-on-two", "joint-on-one", "sharp") if args.regime == "all" else (args.regime,)
    rows = []
    for regime in regimes:
        value = ineq.ghz_hierarchy(regime, seed=args.seed)
        rows.append(ReportRow("ghz_hierarchy", regime, value, 2.0, 4.0, value > 2 + 1e-10))
    return rows, EXIT_OK


def _cmd_povm_check(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    a = parse_direction(args.a, "--a")
    b = parse_direction(args.b, "--b")
    c = parse_direction(args.c, "--c") if args.gamma is not None else None
    for name in ("alpha", "beta", "gamma"):
        v = getattr(args, name)
        if v is not None and not 0.0 <= v <= 1.0:
            raise ConfigError([f"--{name}: {v} outside [0, 1]"])
    tol = args.tolerance if args.tolerance is not None else 1e-10
    try:
        row = povm_check_row(args.alpha, a, args.beta, b, args.gamma, c, tol=tol)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    return [row], EXIT_OK if _povm_row_passed(row) else EXIT_CHECK_FAILED


def _cmd_scan(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    cfg = load_config(args.config)
    try:
        rows = run_config(cfg)
    except InfeasibleMeasurementError as exc:
        raise ConfigError([f"sharpness: {exc}"]) from None
    if args.format_given is False:
        args.format = cfg.format
    if args.out is None:
        args.out = cfg.output
    code = EXIT_OK
    if cfg.scenario == "povm_check" and not all(_povm_row_passed(r) for r in rows):
        code = EXIT_CHECK_FAILED
    return rows, code


def _cmd_reproduce(args: argparse.Namespace) -> tuple[list[ReportRow], int]:
    rows = reproduce_rows(seed=args.seed, tolerance=args.tolerance)
    return rows, EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


COMMANDS: dict[str, Callable[[argparse.Namespace], tuple[list[ReportRow], int]]] = {
    "chsh": _cmd_chsh,
    "mermin": _cmd_mermin,
    "gisin": _cmd_gisin,
    "hierarchy": _cmd_hierarchy,
    "povm-check": _cmd_povm_check,
    "scan": _cmd_scan,
    "reproduce": _cmd_reproduce,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    args.format_given = "--format" in argv or any(a.startswith("--format=") for a in argv)
    try:
        rows, code = COMMANDS[args.command](args)
        emit(rows, args.format, args.out)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"jointbell: config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleMeasurementError, NormalizationError) as exc:
        print(f"jointbell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"jointbell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "reproduce" and args.format == "table" and not args.out:
        verdict = "PASS" if code == EXIT_OK else "FAIL"
        print(f"reproduce: {sum(bool(r.passed) for r in rows)}/{len(rows)} checks passed [{verdict}]")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
