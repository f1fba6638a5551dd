"""Acceleration-to-stress maps and the stress-deviation error channel.

Accelerations are in g throughout and the stress gain ``h`` is in Pa/g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALPHA_GUARD = 1e-6  # rad; alpha must lie in (guard, pi/2 - guard)
DET_FLOOR = 1e-300


class SingularGeometryError(ValueError):
    """Raised when a 2x2 map needed for inversion is singular."""


@dataclass(frozen=True)
class MechanicalParams:
    """Stress gain ``h`` (Pa/g) and sensitivity angle ``alpha`` (rad)."""

    h: float
    alpha: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"stress gain h must be positive, got {self.h}")
        if not ALPHA_GUARD < self.alpha < math.pi / 2 - ALPHA_GUARD:
            raise SingularGeometryError(
                f"sensitivity angle {self.alpha!r} rad is outside the open interval "
                f"({ALPHA_GUARD}, pi/2 - {ALPHA_GUARD}); the stress map would be singular"
            )


def inverse_2x2(m, det_floor: float = DET_FLOOR, what: str = "matrix") -> np.ndarray:
    """Closed-form adjugate inverse with an explicit determinant check."""
    m = np.asarray(m, dtype=float)
    (a, b), (c, d) = m
    det = a * d - b * c
    if not abs(det) > det_floor:
        raise SingularGeometryError(f"{what} is singular (det = {det:.3e})")
    return np.array([[d, -b], [-c, a]]) / det


def polar(magnitude, theta) -> np.ndarray:
    """Acceleration vector(s) from magnitude (g) and direction (rad).

    Broadcasts, returning shape ``(..., 2)``.
    """
    magnitude, theta = np.broadcast_arrays(np.asarray(magnitude, float), np.asarray(theta, float))
    return np.stack([magnitude * np.cos(theta), magnitude * np.sin(theta)], axis=-1)


def nominal_stress_map(params: MechanicalParams) -> np.ndarray:
    c, s = math.cos(params.alpha), math.sin(params.alpha)
    return params.h * np.array([[c, s], [-c, s]])


def stress_from_acceleration(H, a) -> np.ndarray:
    """sigma = H a for one vector or a batch shaped ``(..., 2)``."""
    return np.asarray(a, dtype=float) @ np.asarray(H, dtype=float).T


def stress_deviation_error(H0, dH, a) -> np.ndarray:
    """Acceleration error H0^-1 dH a caused by a perturbed stress map.

    The result does not depend on how the bridges are wired; see
    ``tests/test_mechanics.py`` for the pipeline check.
    """
    H0_inv = inverse_2x2(H0, what="nominal stress map")
    return stress_from_acceleration(H0_inv @ np.asarray(dH, dtype=float), a)
