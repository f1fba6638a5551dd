"""Sensitivity matrices, scale factors and second-order response.

``numeric_linearize`` and ``quadratic_response_fit`` differentiate the exact
networks from :mod:`piezobridge.bridge` by central differences about zero
stress; ``analytic_sensitivity`` gives the closed forms they must agree with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bridge import ConfigId, DualBridge, PiezoCoefficients, dual_output_exact
from .mechanics import SingularGeometryError

FD_STEP = 1e4  # Pa
SINGULAR_RTOL = 1e-18  # |det| < rtol * ||T||_F^2 counts as singular


def analytic_sensitivity(config, coeffs: PiezoCoefficients, v_ex: float = 1.0) -> np.ndarray:
    """First-order sensitivity W (V/Pa): rows are bridges, columns stresses.

    For configuration C the second row is ``[pi_l, -pi_t]``; a matrix with
    two identical rows ``[pi_l, -pi_l]`` would make the scale factor rank-1
    and is inconsistent with the wiring's second-order response.
    """
    cid = ConfigId(config)
    pl, pt = coeffs.pi_l, coeffs.pi_t
    if cid is ConfigId.A:
        return v_ex / 2 * (pl - pt) * np.eye(2)
    if cid in (ConfigId.B, ConfigId.D):
        return v_ex / 4 * (pl - pt) * np.array([[1.0, -1.0], [1.0, 1.0]])
    return v_ex / 2 * np.array([[pl, -pl], [pl, -pt]])


def numeric_linearize(
    dual: DualBridge, coeffs: PiezoCoefficients, v_ex: float = 1.0, step: float = FD_STEP
) -> np.ndarray:
    W = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        W[:, j] = (dual_output_exact(dual, coeffs, e, v_ex=v_ex)
                   - dual_output_exact(dual, coeffs, -e, v_ex=v_ex)) / (2 * step)
    return W


def quadratic_response_fit(
    dual: DualBridge, coeffs: PiezoCoefficients, v_ex: float = 1.0, step: float = FD_STEP
) -> np.ndarray:
    """Symmetric Q[k] with v_k = (W sigma)_k + sigma^T Q[k] sigma + O(sigma^3).

    Returns an array of shape ``(2, 2, 2)`` indexed ``[bridge, i, j]``. Uses
    the 3-point stencil on the diagonal and the 4-point stencil for the
    mixed term; Q is half the Hessian.
    """
    def v(s1, s2):
        return dual_output_exact(dual, coeffs, np.array([s1, s2]), v_ex=v_ex)

    d = step
    v0 = v(0.0, 0.0)
    h11 = (v(d, 0) - 2 * v0 + v(-d, 0)) / d**2
    h22 = (v(0, d) - 2 * v0 + v(0, -d)) / d**2
    h12 = (v(d, d) - v(d, -d) - v(-d, d) + v(-d, -d)) / (4 * d**2)
    Q = np.empty((2, 2, 2))
    Q[:, 0, 0] = h11 / 2
    Q[:, 1, 1] = h22 / 2
    Q[:, 0, 1] = Q[:, 1, 0] = h12 / 2
    return Q


@dataclass(frozen=True)
class ScaleFactor:
    """Nominal scale factor T0 = W H0 (V/g) with its cached inverse."""

    T: np.ndarray
    T_inv: np.ndarray
    config: str | None = None


def nominal_scale_factor(W, H0, config=None) -> ScaleFactor:
    T = np.asarray(W, dtype=float) @ np.asarray(H0, dtype=float)
    det = T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]
    scale = float(np.sum(T * T))
    label = f"configuration {ConfigId(config).value}" if config is not None else "scale factor"
    if scale == 0.0 or abs(det) < SINGULAR_RTOL * scale:
        raise SingularGeometryError(f"{label}: scale factor T0 is singular (det = {det:.3e})")
    T_inv = np.array([[T[1, 1], -T[0, 1]], [-T[1, 0], T[0, 0]]]) / det
    return ScaleFactor(T=T, T_inv=T_inv, config=None if config is None else ConfigId(config).value)


def estimate_acceleration(scale: ScaleFactor, v) -> np.ndarray:
    """T0^-1 v for one output pair or a batch shaped ``(..., 2)``."""
    return np.asarray(v, dtype=float) @ scale.T_inv.T
