"""Command-line entry point: ``piezobridge <command> [--config PATH] [--out PATH]``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import budget, report
from .bridge import standard_configuration
from .budget import DeviationModel
from .linearization import analytic_sensitivity, numeric_linearize
from .report import ConfigError, RunConfig, SweepResult

EXIT_VALIDATION = 2


def cmd_linearize(cfg: RunConfig) -> SweepResult:
    result = SweepResult(["config", "W11", "W12", "W21", "W22", "max_rel_err"])
    for c in cfg.configs:
        W = numeric_linearize(standard_configuration(c, cfg.r0), cfg.coefficients, cfg.v_ex)
        ref = analytic_sensitivity(c, cfg.coefficients, cfg.v_ex)
        scale = np.max(np.abs(ref))
        result.rows.append([c, *W.ravel(), float(np.max(np.abs(W - ref)) / scale)])
    return result


def cmd_nonlinearity(cfg: RunConfig) -> SweepResult:
    """Max over theta of the closed form, next to the exact-network value on the theta grid."""
    theta = np.linspace(0.0, 2 * math.pi, cfg.theta_points)
    result = SweepResult(["config", "max_analytic_g", "max_exact_grid_g"])
    for c in cfg.configs:
        exact = budget.nonlinearity_error_numeric(
            c, cfg.mechanics, cfg.coefficients, cfg.v_ex, cfg.magnitude, theta, r0=cfg.r0)
        result.rows.append([
            c,
            budget.max_nonlinearity_over_direction(c, cfg.mechanics, cfg.coefficients, cfg.magnitude),
            float(np.max(np.linalg.norm(exact, axis=-1))),
        ])
    return result


def cmd_offset(cfg: RunConfig) -> SweepResult:
    result = SweepResult(["config", "mode", "analytic_g2", "linearized_g2", "mc_mean_g2",
                          "mc_stderr_g2", "n_samples", "seed"])
    for c in cfg.configs:
        for mode in cfg.deviation_modes:
            model = DeviationModel(mode, cfg.delta)
            mc = budget.offset_variance_monte_carlo(
                c, cfg.mechanics, cfg.coefficients, cfg.v_ex, model, cfg.samples, cfg.seed,
                cfg.workers, r0=cfg.r0)
            result.rows.append([
                c, mode,
                budget.offset_variance_analytic(c, cfg.mechanics, cfg.coefficients, model),
                budget.offset_variance_linearized(c, cfg.mechanics, cfg.coefficients, model,
                                                  cfg.v_ex, cfg.r0),
                mc.mean, mc.stderr, mc.n_samples, cfg.seed,
            ])
    return result


def cmd_noise(cfg: RunConfig) -> SweepResult:
    result = SweepResult(["config", "S11", "S12", "S22", "worst", "worst_normalized"])
    unit = budget.noise_unit(cfg.h, cfg.coefficients, cfg.noise)
    for c in cfg.configs:
        S = budget.noise_psd_matrix(c, cfg.mechanics, cfg.coefficients, cfg.noise)
        worst = budget.max_eigenvalue_2x2(S)
        result.rows.append([c, S[0, 0], S[0, 1], S[1, 1], worst,
                            worst / unit if unit > 0 else float("nan")])
    return result


def cmd_optimize_alpha(cfg: RunConfig) -> SweepResult:
    result = SweepResult(["config", "alpha_star", "alpha_star_over_pi", "s0", "s0_normalized"])
    unit = budget.noise_unit(cfg.h, cfg.coefficients, cfg.noise)
    for c in cfg.configs:
        alpha, s0 = budget.optimize_sensitivity_angle(c, cfg.coefficients, cfg.noise, cfg.h)
        result.rows.append([c, alpha, alpha / math.pi, s0, s0 / unit if unit > 0 else float("nan")])
    return result


COMMANDS = {
    "linearize": cmd_linearize,
    "nonlinearity": cmd_nonlinearity,
    "offset": cmd_offset,
    "noise": cmd_noise,
    "optimize-alpha": cmd_optimize_alpha,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")

    parser = argparse.ArgumentParser(
        prog="piezobridge",
        description="Error budgets for dual Wheatstone-bridge two-axis accelerometers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    fig = sub.add_parser("figure", parents=[common], help="sweep data for figures 3-7")
    fig.add_argument("number", type=int, choices=[3, 4, 5, 6, 7])
    sub.add_parser("report", parents=[common], help="four-channel summary per configuration")
    return parser


def load_config(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = report.parse_config(text)
    else:
        cfg = RunConfig()
    return report.with_overrides(cfg, out=args.out, seed=args.seed, samples=args.samples)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "figure":
            result = report.reproduce_figure(args.number, cfg)
        elif args.command == "report":
            table = report.report_table(report.run_report(cfg))
            sys.stdout.write(report.format_table(table))
            if cfg.out:
                report.write_csv(table, cfg.out)
            return 0
        else:
            result = COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"piezobridge: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit(report.to_csv(result), cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
