"""Caputo fractional predictor-corrector solver and a fractional malaria model."""

from .analysis import (
    CubicCoefficients,
    NextGenMatrices,
    StabilityReport,
    characteristic_coefficients,
    classify_endemic,
    cubic_discriminant,
    cubic_roots,
    full_report,
    jacobian_dfe,
    jacobian_endemic,
    matignon_stable,
    matignon_verdict,
    next_generation,
)
from .fracsolver import FractionalOrder, NonFiniteStateError, SystemFunction, TimeGrid, Trajectory, solve
from .model import (
    DEFAULT_INITIAL_STATE,
    DEFAULT_PARAMS,
    EpiState,
    ModelParams,
    basic_reproduction_number,
    disease_free_equilibrium,
    endemic_equilibrium,
    rhs,
    system_function,
)

__version__ = "0.1.0"
