"""Exact-network error budgets for piezoresistive two-axis accelerometer bridges."""

from .bridge import (
    ALL_CONFIGS,
    P_SILICON,
    BridgeNetwork,
    ConfigId,
    DualBridge,
    Orientation,
    PiezoCoefficients,
    ResistorSpec,
    bridge_output_exact,
    common_mode_voltage,
    resistance_of,
    standard_configuration,
)
from .budget import (
    DeviationMode,
    DeviationModel,
    ErrorBudget,
    NoiseSpec,
    directional_noise,
    max_nonlinearity_over_direction,
    noise_psd_matrix,
    nonlinearity_error_analytic,
    nonlinearity_error_numeric,
    offset_variance_analytic,
    offset_variance_monte_carlo,
    optimize_sensitivity_angle,
    worst_case_noise,
)
from .linearization import (
    analytic_sensitivity,
    estimate_acceleration,
    nominal_scale_factor,
    numeric_linearize,
    quadratic_response_fit,
)
from .mechanics import (
    MechanicalParams,
    SingularGeometryError,
    nominal_stress_map,
    polar,
    stress_deviation_error,
    stress_from_acceleration,
)

__version__ = "0.1.0"
