"""Exact reduced dynamics of a central qubit coupled to a finite thermal spin bath.

The bath of ``N`` spin-1/2 particles is mapped to a truncated boson mode, and
the qubit evolves under a phase-covariant map fixed by three coefficients
``(alpha, beta, Delta)``. Modules:

``core_map``      closed-form map coefficients and state evolution
``channel``       Choi matrix, Kraus operators, CP-divisibility integrals
``quantumness``   coherence and entanglement decay
``longtime``      time averages, resonances, information trapping
``thermo``        time-local rates, master equation, detailed balance, entropy production
``oracle``        brute-force validators
``sweep``         parameter sweeps
``cli``           command-line front end
"""
from .core_map import (CoefficientSeries, MapCoefficients, QubitState, apply_map, coefficient_derivatives,
                       coefficient_series, evolve, map_coefficients, partition_function, spectral_pair,
                       thermal_weight)
from .kernels import BACKEND
from .params import (Branch, CPViolationError, DomainError, ModelParams, NumericalError, from_physical,
                     temperature_from_kelvin)

__all__ = [
    "BACKEND",
    "Branch",
    "CPViolationError",
    "CoefficientSeries",
    "DomainError",
    "MapCoefficients",
    "ModelParams",
    "NumericalError",
    "QubitState",
    "apply_map",
    "coefficient_derivatives",
    "coefficient_series",
    "evolve",
    "from_physical",
    "map_coefficients",
    "partition_function",
    "spectral_pair",
    "temperature_from_kelvin",
    "thermal_weight",
]
