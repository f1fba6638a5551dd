"""Run configuration, figure sweeps, and the four-channel summary report."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import budget
from .bridge import ALL_CONFIGS, DEFAULT_R0, P_SILICON, ConfigId, PiezoCoefficients
from .budget import DeviationMode, DeviationModel, ErrorBudget, NoiseSpec
from .mechanics import MechanicalParams

PRESETS = {"p-si": P_SILICON}
FIGURE_6_ALPHA = 0.4 * math.pi


class ConfigError(ValueError):
    """Invalid run configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    pi_l: float = P_SILICON.pi_l
    pi_t: float = P_SILICON.pi_t
    h: float = 1e6  # Pa/g
    alpha: float = math.pi / 4
    v_ex: float = 1.0
    s_r: float = 1e-16  # V^2/Hz
    r0: float = DEFAULT_R0
    delta: float = 0.01
    deviation_modes: tuple[str, ...] = tuple(m.value for m in DeviationMode)
    configs: tuple[str, ...] = tuple(c.value for c in ALL_CONFIGS)
    magnitude: float = 1.0  # g
    theta_points: int = 361
    alpha_start: float = 0.05 * math.pi
    alpha_stop: float = 0.45 * math.pi
    alpha_points: int = 201
    stress_perturbation: tuple[float, float, float, float] = (0.01, 0.0, 0.0, 0.0)  # dH / h
    samples: int = 100_000
    seed: int = 42
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        PiezoCoefficients(self.pi_l, self.pi_t)
        MechanicalParams(self.h, self.alpha)
        MechanicalParams(self.h, self.alpha_start)
        MechanicalParams(self.h, self.alpha_stop)
        NoiseSpec(self.s_r, self.v_ex)
        DeviationModel(DeviationMode.INDEPENDENT, self.delta)
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be non-negative, got {self.magnitude}")
        if self.samples < 100:
            raise ValueError(f"samples must be >= 100, got {self.samples}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.theta_points < 2 or self.alpha_points < 2:
            raise ValueError("sweeps need at least two points")
        if self.alpha_start >= self.alpha_stop:
            raise ValueError("alpha_start must be below alpha_stop")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for m in self.deviation_modes:
            DeviationMode(m)
        for c in self.configs:
            ConfigId(c)
        if not self.configs:
            raise ValueError("configs must not be empty")

    @property
    def coefficients(self) -> PiezoCoefficients:
        return PiezoCoefficients(self.pi_l, self.pi_t)

    @property
    def mechanics(self) -> MechanicalParams:
        return MechanicalParams(self.h, self.alpha)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.s_r, self.v_ex)

    @property
    def dH(self) -> np.ndarray:
        return self.h * np.reshape(self.stress_perturbation, (2, 2))


_ANGLE_RE = re.compile(r"^\s*([-+0-9.eE]*)\s*\*?\s*pi\s*$")


def parse_angle(text: str) -> float:
    """Radians, or ``<x>pi`` meaning x times pi (``pi`` alone is allowed)."""
    m = _ANGLE_RE.match(text)
    if m:
        factor = m.group(1)
        return (float(factor) if factor else 1.0) * math.pi
    return float(text)


def _as_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _as_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _as_modes(text: str) -> tuple[str, ...]:
    items = _as_list(text)
    if items == ("all",):
        return tuple(m.value for m in DeviationMode)
    return tuple(DeviationMode(i).value for i in items)


def _as_configs(text: str) -> tuple[str, ...]:
    return tuple(ConfigId(c.upper()).value for c in _as_list(text))


def _as_perturbation(text: str) -> tuple[float, ...]:
    values = tuple(float(v) for v in _as_list(text))
    if len(values) != 4:
        raise ValueError("stress_perturbation needs four entries d11, d12, d21, d22")
    return values


_PARSERS = {
    "pi_l": float,
    "pi_t": float,
    "h": float,
    "alpha": parse_angle,
    "v_ex": float,
    "s_r": float,
    "r0": float,
    "delta": float,
    "deviation_mode": _as_modes,
    "configs": _as_configs,
    "magnitude": float,
    "theta_points": _as_int,
    "alpha_start": parse_angle,
    "alpha_stop": parse_angle,
    "alpha_points": _as_int,
    "stress_perturbation": _as_perturbation,
    "samples": _as_int,
    "seed": _as_int,
    "workers": _as_int,
    "out": str,
}
_FIELD_FOR_KEY = {"deviation_mode": "deviation_modes"}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    ``coefficients = p-si`` selects a preset; explicit ``pi_l``/``pi_t``
    lines override it regardless of order.
    """
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (p.strip() for p in line.partition("="))
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        if key == "coefficients":
            if value.lower() not in PRESETS:
                raise ConfigError(f"unknown coefficient preset {value!r}", lineno)
            preset = PRESETS[value.lower()]
            continue
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[_FIELD_FOR_KEY.get(key, key)] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        lines[_FIELD_FOR_KEY.get(key, key)] = lineno
    if preset is not None:
        values.setdefault("pi_l", preset.pi_l)
        values.setdefault("pi_t", preset.pi_t)
    return _build(values, lines)


def _build(values: dict, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    try:
        return RunConfig(**values)
    except ValueError as exc:
        error = exc
    # Retry one field at a time against the defaults to name the offending line.
    defaults = RunConfig()
    for name, value in values.items():
        try:
            replace(defaults, **{name: value})
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}", lines.get(name)) from None
    raise ConfigError(str(error))


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return cfg
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    values.update(overrides)
    return _build(values)


# -- CSV ---------------------------------------------------------------------------

@dataclass
class SweepResult:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> SweepResult:
    """Inverse of :func:`to_csv`; numeric cells come back as floats."""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = []
    for raw in reader:
        row = []
        for cell in raw:
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return SweepResult(columns, rows)


def write_csv(result: SweepResult, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv(result))


# -- figures --------------------------------------------------------------------

def _normalized_noise_matrix(config, mech: MechanicalParams, cfg: RunConfig) -> np.ndarray:
    spec = cfg.noise if cfg.s_r > 0 else NoiseSpec(1.0, cfg.v_ex)
    S = budget.noise_psd_matrix(config, mech, cfg.coefficients, spec)
    return S / budget.noise_unit(mech.h, cfg.coefficients, spec)


def _theta_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, cfg.theta_points)


def _alpha_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.alpha_start, cfg.alpha_stop, cfg.alpha_points)


def reproduce_figure(n: int, cfg: RunConfig) -> SweepResult:
    """Data behind figures 3-7 as a sweep table.

    3: |nonlinearity error| vs theta.  4: its maximum over theta vs alpha.
    5, 6: normalized directional noise vs theta (6 at alpha = 0.4 pi).
    7: worst-direction normalized noise vs alpha.
    """
    coeffs = cfg.coefficients
    configs = cfg.configs
    if n == 3:
        theta = _theta_grid(cfg)
        cols = [np.linalg.norm(budget.nonlinearity_error_analytic(
            c, cfg.mechanics, coeffs, cfg.magnitude, theta), axis=-1) for c in configs]
        return _sweep("theta", theta, configs, cols)
    if n == 4:
        alpha = _alpha_grid(cfg)
        cols = [[budget.max_nonlinearity_over_direction(
            c, MechanicalParams(cfg.h, a), coeffs, cfg.magnitude) for a in alpha] for c in configs]
        return _sweep("alpha", alpha, configs, cols)
    if n in (5, 6):
        mech = cfg.mechanics if n == 5 else MechanicalParams(cfg.h, FIGURE_6_ALPHA)
        theta = _theta_grid(cfg)
        cols = [budget.directional_noise(_normalized_noise_matrix(c, mech, cfg), theta)
                for c in configs]
        return _sweep("theta", theta, configs, cols)
    if n == 7:
        alpha = _alpha_grid(cfg)
        cols = [[budget.max_eigenvalue_2x2(_normalized_noise_matrix(c, MechanicalParams(cfg.h, a), cfg))
                 for a in alpha] for c in configs]
        return _sweep("alpha", alpha, configs, cols)
    raise ValueError(f"no figure {n}; choose one of 3, 4, 5, 6, 7")


def _sweep(xname, x, configs, cols) -> SweepResult:
    data = np.column_stack([x, *[np.asarray(c, dtype=float) for c in cols]])
    return SweepResult([xname, *configs], data.tolist())


# -- report ---------------------------------------------------------------------

def run_report(cfg: RunConfig) -> list[ErrorBudget]:
    coeffs, mech = cfg.coefficients, cfg.mechanics
    out = []
    for c in cfg.configs:
        analytic, mc = {}, {}
        for mode in cfg.deviation_modes:
            model = DeviationModel(mode, cfg.delta)
            analytic[mode] = budget.offset_variance_analytic(c, mech, coeffs, model)
            mc[mode] = budget.offset_variance_monte_carlo(
                c, mech, coeffs, cfg.v_ex, model, cfg.samples, cfg.seed, cfg.workers, r0=cfg.r0)
        alpha_star, s0 = budget.optimize_sensitivity_angle(c, coeffs, cfg.noise, cfg.h)
        out.append(ErrorBudget(
            config=c,
            max_nonlinearity=budget.max_nonlinearity_over_direction(c, mech, coeffs, cfg.magnitude),
            offset_analytic=analytic,
            offset_mc=mc,
            stress_deviation_gain=budget.stress_deviation_gain(c, mech, coeffs, cfg.dH, cfg.v_ex),
            worst_noise=budget.worst_case_noise(c, mech, coeffs, cfg.noise),
            optimal_alpha=alpha_star,
            optimal_noise=s0,
        ))
    return out


def report_table(budgets: list[ErrorBudget]) -> SweepResult:
    modes = list(budgets[0].offset_analytic) if budgets else []
    columns = ["config", "max_nonlinearity_g"]
    for m in modes:
        columns += [f"offset_{m}_analytic_g2", f"offset_{m}_mc_g2", f"offset_{m}_mc_stderr_g2"]
    columns += ["stress_deviation_gain", "worst_noise_g2_per_hz", "optimal_alpha_rad",
                "optimal_noise_g2_per_hz"]
    rows = []
    for b in budgets:
        row = [b.config, b.max_nonlinearity]
        for m in modes:
            row += [b.offset_analytic[m], b.offset_mc[m].mean, b.offset_mc[m].stderr]
        row += [b.stress_deviation_gain, b.worst_noise, b.optimal_alpha, b.optimal_noise]
        rows.append(row)
    return SweepResult(columns, rows)


def format_table(result: SweepResult) -> str:
    """Transposed plain-text table: one line per quantity, one column per configuration."""
    configs = [str(r[0]) for r in result.rows]
    width = max(len(c) for c in result.columns)
    lines = [" " * width + "".join(f"{c:>14}" for c in configs)]
    for k, name in enumerate(result.columns[1:], start=1):
        cells = "".join(f"{float(r[k]):>14.5g}" for r in result.rows)
        lines.append(f"{name:<{width}}{cells}")
    return "\n".join(lines) + "\n"
