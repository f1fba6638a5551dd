"""Exact Wheatstone-bridge models for the two-proof-mass accelerometer.

Every function here evaluates the resistor network in closed form with no
series truncation. Stresses and deviations may carry leading batch axes
(``(..., 2)`` and ``(..., 8)``); outputs broadcast accordingly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

N_RESISTORS = 8
DEFAULT_R0 = 1000.0  # ohm


class Orientation(enum.Enum):
    LONGITUDINAL = "l"
    TRANSVERSAL = "t"


class ConfigId(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


ALL_CONFIGS = (ConfigId.A, ConfigId.B, ConfigId.C, ConfigId.D)


@dataclass(frozen=True)
class PiezoCoefficients:
    """Longitudinal and transversal piezoresistance coefficients (1/Pa)."""

    pi_l: float
    pi_t: float

    def __post_init__(self):
        if self.pi_l == self.pi_t:
            raise ValueError("pi_l == pi_t makes every bridge insensitive")

    @property
    def difference(self) -> float:
        return self.pi_l - self.pi_t

    @property
    def total(self) -> float:
        return self.pi_l + self.pi_t


P_SILICON = PiezoCoefficients(pi_l=71.8e-11, pi_t=-66.3e-11)


@dataclass(frozen=True)
class ResistorSpec:
    mass: int  # proof mass, 1 or 2
    orientation: Orientation
    slot: int  # index into the eight-entry deviation vector
    r0: float = DEFAULT_R0

    def __post_init__(self):
        if self.mass not in (1, 2):
            raise ValueError(f"proof mass must be 1 or 2, got {self.mass}")
        if not 0 <= self.slot < N_RESISTORS:
            raise ValueError(f"deviation slot out of range: {self.slot}")
        if not self.r0 > 0:
            raise ValueError(f"nominal resistance must be positive, got {self.r0}")

    def coefficient(self, coeffs: PiezoCoefficients) -> float:
        if self.orientation is Orientation.LONGITUDINAL:
            return coeffs.pi_l
        return coeffs.pi_t


# A divider is (top, bottom); top connects to excitation, bottom to ground.
Divider = tuple[ResistorSpec, ResistorSpec]


@dataclass(frozen=True)
class BridgeNetwork:
    """Two voltage dividers; output is midpoint(divider_1) - midpoint(divider_2)."""

    divider_1: Divider
    divider_2: Divider

    def __post_init__(self):
        slots = [r.slot for r in self.resistors]
        if len(set(slots)) != 4:
            raise ValueError(f"bridge reuses a physical resistor: slots {slots}")

    @property
    def resistors(self) -> tuple[ResistorSpec, ...]:
        return (*self.divider_1, *self.divider_2)

    def swapped(self) -> "BridgeNetwork":
        return BridgeNetwork(self.divider_2, self.divider_1)


@dataclass(frozen=True)
class DualBridge:
    config_id: ConfigId
    bridges: tuple[BridgeNetwork, BridgeNetwork]

    def __post_init__(self):
        slots = sorted(r.slot for r in self.resistors)
        if slots != list(range(N_RESISTORS)):
            raise ValueError(f"configuration must use eight distinct resistors, got {slots}")

    @property
    def resistors(self) -> tuple[ResistorSpec, ...]:
        return (*self.bridges[0].resistors, *self.bridges[1].resistors)


def _relative_change(spec: ResistorSpec, coeffs, stresses, deviations):
    """x such that R = R0 * (1 + x); kept separate from 1 to avoid cancellation."""
    sigma = np.asarray(stresses, dtype=float)[..., spec.mass - 1]
    p = spec.coefficient(coeffs) * sigma
    if deviations is None:
        return p
    d = np.asarray(deviations, dtype=float)[..., spec.slot]
    return d + p + d * p


def resistance_of(spec: ResistorSpec, coeffs: PiezoCoefficients, stresses, deviations=None):
    """Resistance R0 (1 + Delta) (1 + pi * sigma) of one piezoresistor, in ohm."""
    return spec.r0 * (1.0 + _relative_change(spec, coeffs, stresses, deviations))


def _midpoint_offset(divider: Divider, coeffs, stresses, deviations):
    """Midpoint potential minus V_ex/2, per volt of excitation.

    v_mid - V/2 = V (R_b - R_t) / (2 (R_b + R_t)); the difference is formed
    from the relative changes so a balanced divider gives exactly zero.
    """
    top, bottom = divider
    x_t = _relative_change(top, coeffs, stresses, deviations)
    x_b = _relative_change(bottom, coeffs, stresses, deviations)
    diff = (bottom.r0 - top.r0) + bottom.r0 * x_b - top.r0 * x_t
    total = bottom.r0 * (1.0 + x_b) + top.r0 * (1.0 + x_t)
    return diff / (2.0 * total)


def divider_voltage(divider: Divider, coeffs, stresses, deviations=None, v_ex: float = 1.0):
    """Absolute midpoint potential V_ex * R_bottom / (R_top + R_bottom)."""
    return v_ex * (0.5 + _midpoint_offset(divider, coeffs, stresses, deviations))


def bridge_output_exact(
    net: BridgeNetwork,
    coeffs: PiezoCoefficients,
    stresses,
    deviations=None,
    v_ex: float = 1.0,
):
    """Differential output of one bridge in volt."""
    m1 = _midpoint_offset(net.divider_1, coeffs, stresses, deviations)
    m2 = _midpoint_offset(net.divider_2, coeffs, stresses, deviations)
    return v_ex * (m1 - m2)


def common_mode_voltage(
    net: BridgeNetwork,
    coeffs: PiezoCoefficients,
    stresses,
    deviations=None,
    v_ex: float = 1.0,
):
    """(node1 + node2)/2 - V_ex/2."""
    m1 = _midpoint_offset(net.divider_1, coeffs, stresses, deviations)
    m2 = _midpoint_offset(net.divider_2, coeffs, stresses, deviations)
    return v_ex * 0.5 * (m1 + m2)


def dual_output_exact(dual: DualBridge, coeffs, stresses, deviations=None, v_ex: float = 1.0):
    """Both bridge outputs stacked on the last axis, shape ``(..., 2)``."""
    return np.stack(
        [bridge_output_exact(b, coeffs, stresses, deviations, v_ex) for b in dual.bridges],
        axis=-1,
    )


# Wiring tables, (mass, orientation) per position in
# (bridge1: div1 top, div1 bottom, div2 top, div2 bottom, bridge2: ...).
_L, _T = Orientation.LONGITUDINAL, Orientation.TRANSVERSAL
_WIRING = {
    ConfigId.A: ((1, _T), (1, _L), (1, _L), (1, _T), (2, _T), (2, _L), (2, _L), (2, _T)),
    # difference bridge, then sum bridge
    ConfigId.B: ((2, _L), (1, _L), (2, _T), (1, _T), (2, _T), (1, _L), (2, _L), (1, _T)),
    ConfigId.C: ((2, _L), (1, _L), (1, _L), (2, _L), (2, _T), (1, _L), (1, _L), (2, _T)),
    ConfigId.D: ((1, _T), (1, _L), (2, _T), (2, _L), (1, _T), (1, _L), (2, _L), (2, _T)),
}


def standard_configuration(config_id, r0: float = DEFAULT_R0) -> DualBridge:
    """Return the wiring of configuration A, B, C or D.

    Deviation slots are assigned in wiring order, so slot k is the k-th
    resistor of ``DualBridge.resistors``.
    """
    cid = ConfigId(config_id)
    specs = [
        ResistorSpec(mass=m, orientation=o, slot=k, r0=r0)
        for k, (m, o) in enumerate(_WIRING[cid])
    ]
    bridges = (
        BridgeNetwork((specs[0], specs[1]), (specs[2], specs[3])),
        BridgeNetwork((specs[4], specs[5]), (specs[6], specs[7])),
    )
    return DualBridge(cid, bridges)
