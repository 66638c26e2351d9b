"""Predictability sieve for a damped harmonic oscillator in the Gaussian sector."""

from .errors import (
    HeisenbergViolation,
    InvalidArea,
    InvalidShape,
    NegativeTime,
    NonDissipative,
    NotPositive,
    PhysicsError,
    PositivityViolation,
)
from .gaussian_core import (
    CovarianceMatrix,
    PhysicalConstants,
    ShapeDecomposition,
    canonicalize,
    check_heisenberg,
    compose,
    decompose,
    entropy,
)
from .lindblad_model import (
    GeneratorCoefficients,
    LindbladParams,
    Propagator,
    coefficients_to_parameters,
    det_sigma_expanded,
    evolve,
    evolve_many,
    propagator,
    stationary_covariance,
)
from .sieve import (
    GridSpec,
    SievePoint,
    SieveResult,
    TimeIndependenceReport,
    cross_check,
    objective_surface,
    optimal_shape_from_kernels,
    optimal_shape_numeric,
    optimal_squeezing_closed_form,
    sieve_kernels,
    sieve_objective,
    sieve_time_independence_check,
)

__version__ = "0.1.0"

__all__ = [
    "CovarianceMatrix",
    "GeneratorCoefficients",
    "GridSpec",
    "HeisenbergViolation",
    "InvalidArea",
    "InvalidShape",
    "LindbladParams",
    "NegativeTime",
    "NonDissipative",
    "NotPositive",
    "PhysicalConstants",
    "PhysicsError",
    "PositivityViolation",
    "Propagator",
    "ShapeDecomposition",
    "SievePoint",
    "SieveResult",
    "TimeIndependenceReport",
    "canonicalize",
    "check_heisenberg",
    "coefficients_to_parameters",
    "compose",
    "cross_check",
    "objective_surface",
    "decompose",
    "det_sigma_expanded",
    "entropy",
    "evolve",
    "evolve_many",
    "optimal_shape_from_kernels",
    "optimal_shape_numeric",
    "optimal_squeezing_closed_form",
    "propagator",
    "sieve_kernels",
    "sieve_objective",
    "sieve_time_independence_check",
    "stationary_covariance",
]
