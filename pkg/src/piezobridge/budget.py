"""Error channels of the dual-bridge accelerometer.

Each channel has a closed form and an independent route through the exact
networks: bridge nonlinearity (quadratic extraction from the exact bridge
outputs), offset from resistor mismatch (first-order propagation and seeded
Monte Carlo), and noise PSD propagated through the scale factor.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .bridge import (
    DEFAULT_R0,
    N_RESISTORS,
    ConfigId,
    DualBridge,
    Orientation,
    PiezoCoefficients,
    dual_output_exact,
    standard_configuration,
)
from .linearization import (
    ScaleFactor,
    analytic_sensitivity,
    estimate_acceleration,
    nominal_scale_factor,
)
from .mechanics import (
    ALPHA_GUARD,
    MechanicalParams,
    nominal_stress_map,
    polar,
    stress_from_acceleration,
)

MC_BLOCK = 4096  # samples per independently seeded substream


class DeviationMode(str, enum.Enum):
    INDEPENDENT = "independent"
    PER_PROOF_MASS = "per-proof-mass"
    PER_ORIENTATION = "per-orientation"


@dataclass(frozen=True)
class DeviationModel:
    mode: DeviationMode
    delta_rms: float

    def __post_init__(self):
        object.__setattr__(self, "mode", DeviationMode(self.mode))
        if not self.delta_rms >= 0:
            raise ValueError(f"delta_rms must be non-negative, got {self.delta_rms}")


@dataclass(frozen=True)
class NoiseSpec:
    """Per-resistor noise PSD ``s_r`` (V^2/Hz) at one frequency, excitation ``v_ex`` (V)."""

    s_r: float
    v_ex: float = 1.0

    def __post_init__(self):
        if not self.s_r >= 0:
            raise ValueError(f"s_r must be non-negative, got {self.s_r}")
        if not self.v_ex > 0:
            raise ValueError(f"v_ex must be positive, got {self.v_ex}")


def scale_factor_for(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                     v_ex: float = 1.0) -> ScaleFactor:
    W = analytic_sensitivity(config, coeffs, v_ex)
    return nominal_scale_factor(W, nominal_stress_map(mech), config)


def noise_unit(h: float, coeffs: PiezoCoefficients, spec: NoiseSpec) -> float:
    """S_R / [h V_ex (pi_l - pi_t)]^2, the normalization used for noise curves."""
    return spec.s_r / (h * spec.v_ex * coeffs.difference) ** 2


# -- bridge nonlinearity ------------------------------------------------------

def nonlinearity_error_analytic(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                                magnitude, theta) -> np.ndarray:
    """Leading quadratic error in the estimated acceleration, shape ``(..., 2)`` in g."""
    cid = ConfigId(config)
    magnitude = np.asarray(magnitude, dtype=float)
    theta = np.asarray(theta, dtype=float)
    alpha = mech.alpha
    c_minus = np.cos(theta - alpha) ** 2
    c_plus = np.cos(theta + alpha) ** 2
    pre = -mech.h * magnitude**2 / 4
    pl, pt = coeffs.pi_l, coeffs.pi_t
    if cid is ConfigId.C:
        e1 = pl * (c_minus - c_plus) / math.cos(alpha)
        e2 = (pl * c_minus + (pl + 2 * pt) * c_plus) / math.sin(alpha)
    else:
        e1 = (pl + pt) * (c_minus - c_plus) / math.cos(alpha)
        e2 = (pl + pt) * (c_minus + c_plus) / math.sin(alpha)
    return np.stack(np.broadcast_arrays(pre * e1, pre * e2), axis=-1)


def acceleration_error_exact(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                             v_ex: float, a, r0: float = DEFAULT_R0) -> np.ndarray:
    """T0^-1 v_exact(a) - a through the exact networks (no deviations)."""
    dual = standard_configuration(config, r0)
    a = np.asarray(a, dtype=float)
    sigma = stress_from_acceleration(nominal_stress_map(mech), a)
    v = dual_output_exact(dual, coeffs, sigma, v_ex=v_ex)
    return estimate_acceleration(scale_factor_for(config, mech, coeffs, v_ex), v) - a


def nonlinearity_error_numeric(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                               v_ex: float, magnitude, theta, r0: float = DEFAULT_R0) -> np.ndarray:
    """Even part of the exact-pipeline error, isolating the quadratic term."""
    a = polar(magnitude, theta)
    plus = acceleration_error_exact(config, mech, coeffs, v_ex, a, r0)
    minus = acceleration_error_exact(config, mech, coeffs, v_ex, -a, r0)
    return (plus + minus) / 2


def max_nonlinearity_over_direction(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                                    magnitude: float, n_grid: int = 720) -> float:
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")

    def norm(theta):
        return np.linalg.norm(nonlinearity_error_analytic(config, mech, coeffs, magnitude, theta),
                              axis=-1)

    step = 2 * math.pi / n_grid
    grid = np.arange(n_grid) * step
    values = norm(grid)
    k = int(np.argmax(values))
    best = float(values[k])
    if best == 0.0:
        return 0.0
    res = optimize.minimize_scalar(lambda t: -norm(t), bounds=(grid[k] - step, grid[k] + step),
                                   method="bounded", options={"xatol": 1e-10})
    return max(best, float(-res.fun))


# -- offset from resistor mismatch --------------------------------------------

def deviation_mixing(dual: DualBridge, mode) -> np.ndarray:
    """Matrix M (8 x k) so that slot deviations are delta_rms * M z, z ~ N(0, I_k)."""
    mode = DeviationMode(mode)
    resistors = sorted(dual.resistors, key=lambda r: r.slot)
    if mode is DeviationMode.INDEPENDENT:
        return np.eye(N_RESISTORS)
    M = np.zeros((N_RESISTORS, 2))
    for r in resistors:
        if mode is DeviationMode.PER_PROOF_MASS:
            col = r.mass - 1
        else:
            col = 0 if r.orientation is Orientation.LONGITUDINAL else 1
        M[r.slot, col] = 1.0
    return M


def offset_sensitivity(dual: DualBridge, coeffs: PiezoCoefficients, v_ex: float = 1.0,
                       step: float = 1e-6) -> np.ndarray:
    """d v0 / d Delta at zero stress, shape (2, 8), by central differences."""
    J = np.empty((2, N_RESISTORS))
    zero = np.zeros(2)
    for k in range(N_RESISTORS):
        d = np.zeros(N_RESISTORS)
        d[k] = step
        J[:, k] = (dual_output_exact(dual, coeffs, zero, d, v_ex)
                   - dual_output_exact(dual, coeffs, zero, -d, v_ex)) / (2 * step)
    return J


def offset_variance_analytic(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                             model: DeviationModel) -> float:
    """Closed-form <|Delta a|^2> (g^2) for the three correlation models."""
    cid = ConfigId(config)
    d2 = model.delta_rms**2
    pl, pt = coeffs.pi_l, coeffs.pi_t
    s2a = math.sin(2 * mech.alpha)
    if model.mode is DeviationMode.INDEPENDENT:
        a_value = 2 * d2 / (mech.h * (pl - pt) * s2a) ** 2
        if cid is ConfigId.A:
            return a_value
        b_value = 2 * a_value
        if cid is ConfigId.C:
            ratio = (3 * pl**2 + pt**2 + 2 * pl * (pl + pt) * math.cos(2 * mech.alpha)) / (4 * pl**2)
            return ratio * b_value
        return b_value
    if model.mode is DeviationMode.PER_PROOF_MASS:
        if cid is ConfigId.C:
            return 4 * d2 / (mech.h * pl * s2a) ** 2
        return 0.0
    return 2 * d2 / (mech.h * (pl - pt) * math.sin(mech.alpha)) ** 2


def offset_variance_linearized(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                               model: DeviationModel, v_ex: float = 1.0,
                               r0: float = DEFAULT_R0) -> float:
    """First-order propagation: delta^2 * ||T0^-1 J M||_F^2.

    Uses only the exact-network offset sensitivity ``J`` and the mixing
    matrix, so it checks the closed forms without sharing their algebra.
    """
    dual = standard_configuration(config, r0)
    scale = scale_factor_for(config, mech, coeffs, v_ex)
    G = scale.T_inv @ offset_sensitivity(dual, coeffs, v_ex) @ deviation_mixing(dual, model.mode)
    return float(model.delta_rms**2 * np.sum(G * G))


def _block_normals(seed: int, block: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss)).standard_normal((MC_BLOCK, N_RESISTORS))


def offset_samples(config, mech: MechanicalParams, coeffs: PiezoCoefficients, v_ex: float,
                   model: DeviationModel, seed: int, start: int, stop: int,
                   r0: float = DEFAULT_R0) -> np.ndarray:
    """|Delta a|^2 for sample indices ``[start, stop)``.

    Sample i draws from substream ``i // MC_BLOCK`` of ``seed``, so any
    partition of the index range reproduces the same values.
    """
    if stop <= start:
        return np.empty(0)
    dual = standard_configuration(config, r0)
    scale = scale_factor_for(config, mech, coeffs, v_ex)
    M = deviation_mixing(dual, model.mode)
    first, last = start // MC_BLOCK, (stop - 1) // MC_BLOCK
    z = np.concatenate([_block_normals(seed, b) for b in range(first, last + 1)])
    z = z[start - first * MC_BLOCK: stop - first * MC_BLOCK, : M.shape[1]]
    deviations = model.delta_rms * z @ M.T
    v0 = dual_output_exact(dual, coeffs, np.zeros(2), deviations, v_ex)
    err = estimate_acceleration(scale, v0)
    return np.sum(err * err, axis=-1)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int


def offset_variance_monte_carlo(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                                v_ex: float, model: DeviationModel, n_samples: int, seed: int,
                                workers: int = 1, r0: float = DEFAULT_R0) -> MonteCarloEstimate:
    """Sample mean of |Delta a|^2 with its standard error.

    ``workers > 1`` splits the index range over threads; the per-sample
    values and their reduction order are unchanged, so results are identical.
    """
    if n_samples < 100:
        raise ValueError(f"n_samples must be >= 100, got {n_samples}")
    bounds = np.linspace(0, n_samples, max(1, workers) + 1).astype(int)
    args = (config, mech, coeffs, v_ex, model, seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda lo_hi: offset_samples(*args, *lo_hi, r0=r0),
                                  zip(bounds[:-1], bounds[1:])))
    else:
        parts = [offset_samples(*args, 0, n_samples, r0=r0)]
    x = np.concatenate(parts)
    return MonteCarloEstimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)),
                              int(x.size))


# -- noise ---------------------------------------------------------------------

def noise_psd_matrix(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                     spec: NoiseSpec) -> np.ndarray:
    """S_a = S_R T0^-1 T0^-T in g^2/Hz."""
    T_inv = scale_factor_for(config, mech, coeffs, spec.v_ex).T_inv
    S = spec.s_r * T_inv @ T_inv.T
    return (S + S.T) / 2


def directional_noise(S_a, theta):
    """n(theta)^T S_a n(theta); broadcasts over ``theta``."""
    n = polar(1.0, theta)
    return np.einsum("...i,ij,...j->...", n, np.asarray(S_a, dtype=float), n)


def max_eigenvalue_2x2(S) -> float:
    (a, b), (_, c) = np.asarray(S, dtype=float)
    return (a + c) / 2 + math.hypot((a - c) / 2, b)


def min_eigenvalue_2x2(S) -> float:
    (a, b), (_, c) = np.asarray(S, dtype=float)
    return (a + c) / 2 - math.hypot((a - c) / 2, b)


def worst_case_noise(config, mech: MechanicalParams, coeffs: PiezoCoefficients,
                     spec: NoiseSpec) -> float:
    return max_eigenvalue_2x2(noise_psd_matrix(config, mech, coeffs, spec))


def optimize_sensitivity_angle(config, coeffs: PiezoCoefficients, spec: NoiseSpec, h: float,
                               n_grid: int = 2001) -> tuple[float, float]:
    """Minimize the worst-direction noise over alpha; returns (alpha*, S0).

    Golden-section refinement on the grid bracket around the coarse minimum.
    With ``s_r == 0`` the objective is flat and pi/4 is returned.
    """
    if spec.s_r == 0:
        return math.pi / 4, 0.0
    lo, hi = 2 * ALPHA_GUARD, math.pi / 2 - 2 * ALPHA_GUARD

    def objective(alpha):
        return worst_case_noise(config, MechanicalParams(h, float(alpha)), coeffs, spec)

    grid = np.linspace(lo, hi, n_grid)
    values = np.array([objective(a) for a in grid])
    k = int(np.argmin(values))
    k = min(max(k, 1), n_grid - 2)
    res = optimize.minimize_scalar(objective, bracket=(grid[k - 1], grid[k], grid[k + 1]),
                                   method="golden", tol=1e-10)
    if res.fun <= values[k]:
        return float(res.x), float(res.fun)
    return float(grid[k]), float(values[k])


def stress_deviation_gain(config, mech: MechanicalParams, coeffs: PiezoCoefficients, dH,
                          v_ex: float = 1.0) -> float:
    """Spectral norm of the linear-pipeline error map for a perturbed stress map."""
    W = analytic_sensitivity(config, coeffs, v_ex)
    H = nominal_stress_map(mech) + np.asarray(dH, dtype=float)
    E = scale_factor_for(config, mech, coeffs, v_ex).T_inv @ W @ H - np.eye(2)
    return float(np.linalg.norm(E, 2))


# -- summary record ---------------------------------------------------------------

@dataclass(frozen=True)
class ErrorBudget:
    config: str
    max_nonlinearity: float  # g
    offset_analytic: dict[str, float]  # g^2 per deviation mode
    offset_mc: dict[str, MonteCarloEstimate]
    stress_deviation_gain: float  # ||T0^-1 W (H0 + dH) - I||_2, g per g
    worst_noise: float  # g^2/Hz at the configured alpha
    optimal_alpha: float  # rad
    optimal_noise: float  # g^2/Hz at optimal_alpha
