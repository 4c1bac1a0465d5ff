"""Model parameters, physical-unit conversion and error types.

All internal quantities use natural units with hbar = k_B = 1. Frequencies are
angular (rad per unit time) and temperatures are energies, so the thermal
exponent of the bath is simply ``omega / temperature``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

INFINITE = math.inf

# CODATA 2018 exact values (SI).
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
MHZ = 1.0e6  # 1 MHz read as 1e6 rad/s
MICROSECOND = 1.0e-6  # s


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CPViolationError(ValueError):
    """Map coefficients or a Choi matrix fail complete positivity."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NumericalError(RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


class Branch(str, enum.Enum):
    """Sign convention of the ground-state factor in the coherence function.

    ``UNITARY`` is the factor obtained by solving the block Schrodinger
    equations; it agrees with brute-force joint evolution. ``MIRRORED`` flips the
    sign of the detuning term of the ground-state factor, so the two dressed
    level shifts subtract instead of adding. The mirrored variant is not the
    reduced dynamics of the model Hamiltonian; it is kept for comparison with
    results computed under that convention.
    """

    UNITARY = "unitary"
    MIRRORED = "mirrored"

    @property
    def sign(self) -> float:
        return -1.0 if self is Branch.UNITARY else 1.0


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the central spin and its bath.

    Parameters
    ----------
    omega0 : float
        Transition frequency of the central spin.
    omega : float
        Bath frequency (collective, rescaled by ``1/N`` per spin).
    epsilon : float
        System-bath coupling strength, ``>= 0``.
    n_bath : int
        Number of bath spins ``N >= 1``.
    temperature : float
        Bath temperature in energy units; ``math.inf`` (``INFINITE``) is an
        exact value, not a large float.
    branch : Branch
        Sign convention of the coherence function, see :class:`Branch`.
    """

    omega0: float = 1.0
    omega: float = 1.0
    epsilon: float = 1.0
    n_bath: int = 1
    temperature: float = INFINITE
    branch: Branch = Branch.UNITARY

    def __post_init__(self):
        n = self.n_bath
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise DomainError(f"n_bath must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_bath", int(n))
        for name in ("omega0", "omega", "epsilon", "temperature"):
            value = float(getattr(self, name))
            if math.isnan(value):
                raise DomainError(f"{name} is NaN")
            object.__setattr__(self, name, value)
        if math.isinf(self.omega0) or math.isinf(self.omega) or math.isinf(self.epsilon):
            raise DomainError("frequencies must be finite")
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.omega < 0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0 or infinite, got {self.temperature}")
        object.__setattr__(self, "branch", Branch(self.branch))
        if not math.isfinite(self.thermal_exponent):
            raise DomainError("omega / temperature overflows")

    @property
    def infinite_temperature(self) -> bool:
        return math.isinf(self.temperature)

    @property
    def thermal_exponent(self) -> float:
        """Dimensionless ``b = omega / T``; exactly 0 at infinite temperature."""
        if self.infinite_temperature:
            return 0.0
        return self.omega / self.temperature

    @property
    def detuning(self) -> float:
        """Signed detuning ``omega0 - omega / 2N`` shared by every level block."""
        return self.omega0 - self.omega / (2.0 * self.n_bath)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "omega": self.omega,
            "epsilon": self.epsilon,
            "n_bath": self.n_bath,
            "temperature": self.temperature,
            "branch": self.branch.value,
        }


def temperature_from_kelvin(kelvin: float) -> float:
    """Temperature in rad/us frequency units, matching frequencies given in MHz."""
    if kelvin == INFINITE:
        return INFINITE
    return K_B * kelvin / HBAR / MHZ


def from_physical(
    omega0_mhz: float,
    omega_mhz: float,
    epsilon_mhz: float,
    n_bath: int,
    temperature_kelvin: float,
    branch: Branch | str = Branch.UNITARY,
) -> ModelParams:
    """Build natural-unit parameters from MHz frequencies and a Kelvin temperature.

    Frequencies keep their numerical value (rad/us), so the natural time unit is
    one microsecond and times can be passed in microseconds unchanged.
    """
    return ModelParams(
        omega0=omega0_mhz,
        omega=omega_mhz,
        epsilon=epsilon_mhz,
        n_bath=n_bath,
        temperature=temperature_from_kelvin(temperature_kelvin),
        branch=Branch(branch),
    )
