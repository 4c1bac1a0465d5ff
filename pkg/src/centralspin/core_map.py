"""Closed-form reduced dynamical map of the central qubit.

The bath conserves the excitation number, so the joint evolution splits into
2x2 blocks labelled by the boson occupation ``n`` of the Holstein-Primakoff
mode. Each block contributes a Rabi oscillation with frequency ``eta(n)`` (the
excited-state block) or ``eta'(n)`` (the ground-state block) weighted by the
thermal occupation ``w_n`` of the bath. Summing the blocks gives three
coefficients that fix the map completely::

    rho11(t) = rho11(0) (1 - alpha) + rho22(0) beta
    rho12(t) = rho12(0) Delta

Density matrices use index 0 for the excited state ``|1>``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import CPViolationError, DomainError, ModelParams

CP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectralPair:
    eta: float
    eta_prime: float
    level: int


@dataclass(frozen=True)
class LevelData:
    """Per-level arrays for ``n = 0..N`` shared by every evaluation."""

    n: np.ndarray
    eta: np.ndarray
    eta_p: np.ndarray
    weight: np.ndarray
    amp_alpha: np.ndarray  # 4 g_n^2 w_n
    amp_beta: np.ndarray  # 4 g'_n^2 w_n, exactly 0 at n = 0
    ratio_a: np.ndarray  # detuning / eta, 0 where eta = 0
    ratio_b: np.ndarray  # detuning / eta', 0 where eta' = 0
    phase_rate: float  # omega / 2N


def _check_level(params: ModelParams, n) -> int:
    if isinstance(n, bool) or int(n) != n or not 0 <= n <= params.n_bath:
        raise DomainError(f"level n={n!r} outside [0, {params.n_bath}]")
    return int(n)


def coupling_squared(params: ModelParams, n):
    """Squared block coupling ``g_n^2 = eps^2 (n+1)(1 - n/2N)`` of |1,n> <-> |0,n+1>."""
    N = params.n_bath
    return params.epsilon**2 * (n + 1) * (1.0 - n / (2.0 * N))


def spectral_pair(params: ModelParams, n: int) -> SpectralPair:
    """Rabi frequencies of the two blocks that contain level ``n``."""
    n = _check_level(params, n)
    d2 = params.detuning**2
    eta = math.sqrt(d2 + 4.0 * coupling_squared(params, n))
    eta_p = math.sqrt(d2 + 4.0 * coupling_squared(params, n - 1)) if n > 0 else abs(params.detuning)
    return SpectralPair(eta=eta, eta_prime=eta_p, level=n)


def thermal_weights(params: ModelParams) -> np.ndarray:
    """Normalised Boltzmann weights of the boson levels ``0..N``."""
    N = params.n_bath
    n = np.arange(N + 1, dtype=float)
    if params.infinite_temperature:
        return np.full(N + 1, 1.0 / (N + 1))
    # shifted so the largest exponent is 0
    w = np.exp(-params.thermal_exponent * n / (2.0 * N))
    return w / math.fsum(w)


def partition_function(params: ModelParams) -> float:
    """``Z = sum_n exp(-b (n/2N - 1/2))``; ``inf`` if it overflows."""
    N = params.n_bath
    if params.infinite_temperature:
        return float(N + 1)
    b = params.thermal_exponent
    n = np.arange(N + 1, dtype=float)
    try:
        return math.exp(b / 2.0) * math.fsum(np.exp(-b * n / (2.0 * N)))
    except OverflowError:
        return math.inf


def thermal_weight(params: ModelParams, n: int) -> float:
    n = _check_level(params, n)
    return float(thermal_weights(params)[n])


@functools.lru_cache(maxsize=64)
def level_data(params: ModelParams) -> LevelData:
    N = params.n_bath
    n = np.arange(N + 1, dtype=float)
    d = params.detuning
    g2 = coupling_squared(params, n)
    g2p = np.where(n > 0, coupling_squared(params, n - 1), 0.0)
    eta = np.sqrt(d * d + 4.0 * g2)
    eta_p = np.sqrt(d * d + 4.0 * g2p)
    w = thermal_weights(params)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_a = np.where(eta > 0, d / eta, 0.0)
        ratio_b = np.where(eta_p > 0, d / eta_p, 0.0)
    amp_beta = 4.0 * g2p * w
    amp_beta[0] = 0.0
    data = LevelData(
        n=n,
        eta=eta,
        eta_p=eta_p,
        weight=w,
        amp_alpha=4.0 * g2 * w,
        amp_beta=amp_beta,
        ratio_a=ratio_a,
        ratio_b=ratio_b,
        phase_rate=params.omega / (2.0 * N),
    )
    for arr in (data.n, data.eta, data.eta_p, data.weight, data.amp_alpha, data.amp_beta,
                data.ratio_a, data.ratio_b):
        arr.setflags(write=False)
    return data


@dataclass(frozen=True)
class MapCoefficients:
    """The triple ``(alpha, beta, Delta)`` at one time."""

    alpha: float
    beta: float
    delta: complex
    time: float = 0.0

    @classmethod
    def identity(cls, time: float = 0.0) -> "MapCoefficients":
        return cls(0.0, 0.0, 1.0 + 0.0j, time)

    @property
    def delta_re(self) -> float:
        return self.delta.real

    @property
    def delta_im(self) -> float:
        return self.delta.imag

    def cp_margin(self) -> float:
        """``(1 - alpha)(1 - beta) - |Delta|^2``; negative means not CP."""
        return (1.0 - self.alpha) * (1.0 - self.beta) - abs(self.delta) ** 2

    def validate(self, tol: float = CP_TOLERANCE) -> "MapCoefficients":
        a, b = self.alpha, self.beta
        if not (-tol <= a <= 1 + tol and -tol <= b <= 1 + tol):
            raise CPViolationError(f"alpha={a!r}, beta={b!r} outside [0, 1]")
        margin = self.cp_margin()
        if margin < -tol:
            raise CPViolationError(
                f"|Delta|^2 exceeds (1-alpha)(1-beta) by {-margin:.3e}", min_eigenvalue=margin / 2
            )
        return self


@dataclass(frozen=True)
class QubitState:
    """Qubit density matrix ``[[rho11, rho12], [conj(rho12), 1 - rho11]]``."""

    rho11: float
    rho12: complex = 0.0j

    def __post_init__(self):
        object.__setattr__(self, "rho11", float(self.rho11))
        object.__setattr__(self, "rho12", complex(self.rho12))
        tol = 1e-10
        if not -tol <= self.rho11 <= 1 + tol:
            raise DomainError(f"rho11={self.rho11} outside [0, 1]")
        if abs(self.rho12) ** 2 > self.rho11 * (1 - self.rho11) + tol:
            raise DomainError("state is not positive semidefinite")

    @property
    def rho22(self) -> float:
        return 1.0 - self.rho11

    @property
    def rho21(self) -> complex:
        return self.rho12.conjugate()

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12], [self.rho21, self.rho22]], dtype=complex)

    def bloch(self) -> np.ndarray:
        return np.array([2 * self.rho12.real, -2 * self.rho12.imag, 2 * self.rho11 - 1])

    @classmethod
    def from_matrix(cls, m) -> "QubitState":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        if abs(m[0, 1] - np.conj(m[1, 0])) > 1e-10 or abs(np.trace(m) - 1) > 1e-10:
            raise DomainError("matrix is not a unit-trace Hermitian matrix")
        return cls(m[0, 0].real, m[0, 1])

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float) -> "QubitState":
        return cls((1 + z) / 2, complex(x, -y) / 2)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls(1.0)

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(0.0)

    @classmethod
    def maximally_mixed(cls) -> "QubitState":
        return cls(0.5)

    @classmethod
    def maximally_coherent(cls) -> "QubitState":
        return cls(0.5, 0.5)


@dataclass(frozen=True)
class CoefficientSeries:
    """Map coefficients (and optionally their derivatives) on a time grid."""

    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    d_alpha: np.ndarray | None = None
    d_beta: np.ndarray | None = None
    d_delta: np.ndarray | None = None

    def at(self, i: int) -> MapCoefficients:
        return MapCoefficients(float(self.alpha[i]), float(self.beta[i]), complex(self.delta[i]),
                               float(self.times[i]))


def coefficient_series(params: ModelParams, times, derivatives: bool = False,
                       backend: str | None = None) -> CoefficientSeries:
    """Evaluate ``alpha, beta, Delta`` (and derivatives) at every time."""
    times = np.ascontiguousarray(np.atleast_1d(np.asarray(times, dtype=float)))
    if np.any(times < 0):
        raise DomainError("times must be >= 0")
    lv = level_data(params)
    out = kernels.evaluate(times, lv, params.branch.sign, derivatives, backend=backend)
    phase = np.exp(-1j * lv.phase_rate * times)
    p = out[2] + 1j * out[3]
    delta = phase * p
    if not derivatives:
        return CoefficientSeries(times, out[0], out[1], delta)
    dp = out[6] + 1j * out[7]
    d_delta = phase * (dp - 1j * lv.phase_rate * p)
    return CoefficientSeries(times, out[0], out[1], delta, out[4], out[5], d_delta)


def map_coefficients(params: ModelParams, t: float) -> MapCoefficients:
    if t < 0:
        raise DomainError(f"t={t} must be >= 0")
    return coefficient_series(params, [t]).at(0)


def coefficient_derivatives(params: ModelParams, t: float) -> tuple[float, float, complex]:
    """Analytic ``(d alpha/dt, d beta/dt, d Delta/dt)`` at time ``t``."""
    if t < 0:
        raise DomainError(f"t={t} must be >= 0")
    s = coefficient_series(params, [t], derivatives=True)
    return float(s.d_alpha[0]), float(s.d_beta[0]), complex(s.d_delta[0])


def apply_map(coeffs: MapCoefficients, rho0: QubitState) -> QubitState:
    coeffs.validate(CP_TOLERANCE)
    rho11 = rho0.rho11 * (1.0 - coeffs.alpha) + rho0.rho22 * coeffs.beta
    return QubitState(rho11, rho0.rho12 * coeffs.delta)


def evolve(params: ModelParams, rho0: QubitState, t: float) -> QubitState:
    return apply_map(map_coefficients(params, t), rho0)
