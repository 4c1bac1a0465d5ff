"""Choi state, Kraus operators and channel-level checks for the qubit map."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .core_map import CP_TOLERANCE, MapCoefficients, QubitState
from .params import CPViolationError, DomainError, ModelParams

SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()


def _positive_phase(v: np.ndarray) -> np.ndarray:
    # largest-magnitude component made real positive; ties go to the first index
    k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(v.size)))
    return v * np.exp(-1j * np.angle(v[k]))


def choi_state(coeffs: MapCoefficients) -> np.ndarray:
    """CJ state ``(I x Phi)(|phi+><phi+|)``, ancilla first, basis ``|00>,|01>,|10>,|11>``."""
    a, b, d = coeffs.alpha, coeffs.beta, coeffs.delta
    chi = np.zeros((4, 4), dtype=complex)
    chi[0, 0] = (1 - a) / 2
    chi[1, 1] = a / 2
    chi[2, 2] = b / 2
    chi[3, 3] = (1 - b) / 2
    chi[0, 3] = d / 2
    chi[3, 0] = np.conj(d) / 2
    lam = np.linalg.eigvalsh(chi)
    if lam[0] < -CP_TOLERANCE:
        raise CPViolationError(f"Choi matrix has eigenvalue {lam[0]:.3e}", min_eigenvalue=float(lam[0]))
    return chi


def choi_from_kraus(kraus) -> np.ndarray:
    """``sum_ij E_ij x Phi(E_ij) / 2`` for the map defined by ``kraus``."""
    chi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2))
            e[i, j] = 1.0
            out = sum(k @ e @ k.conj().T for k in kraus)
            chi[2 * i:2 * i + 2, 2 * j:2 * j + 2] = out / 2
    return chi


def kraus_from_choi(chi: np.ndarray, zero_eps: float = 1e-14) -> list[np.ndarray]:
    """Generic Kraus set from the eigensystem of a 4x4 Choi matrix."""
    lam, vecs = np.linalg.eigh(chi)
    if lam[0] < -CP_TOLERANCE:
        raise CPViolationError(f"Choi matrix has eigenvalue {lam[0]:.3e}", min_eigenvalue=float(lam[0]))
    ops = []
    for val, v in sorted(zip(lam, vecs.T), key=lambda p: -p[0]):
        if val <= zero_eps:
            continue
        v = _positive_phase(v)
        ops.append(math.sqrt(2 * val) * v.reshape(2, 2).T)
    return ops


@dataclass(frozen=True)
class KrausSet:
    """Four Kraus operators ``K1..K4`` of the qubit map and the scalars behind them.

    ``K1`` raises (weight ``beta``), ``K2`` lowers (weight ``alpha``) and
    ``K3``, ``K4`` are diagonal with weights ``x1 >= x2`` taken from the
    coherence block of the Choi matrix.
    """

    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    k4: np.ndarray
    x1: float
    x2: float
    y1: float
    y2: float
    theta: float
    choi: np.ndarray

    @property
    def operators(self) -> list[np.ndarray]:
        return [self.k1, self.k2, self.k3, self.k4]

    def completeness_residual(self) -> float:
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(2))))

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(choi_from_kraus(self.operators) - self.choi)))


def kraus_operators(coeffs: MapCoefficients) -> KrausSet:
    """Kraus set from the eigendecomposition of the Choi matrix.

    The Choi matrix is X-shaped: two 1x1 blocks give ``K1``, ``K2`` directly and
    the 2x2 coherence block is diagonalised numerically, which stays well
    conditioned when ``Delta`` vanishes.
    """
    chi = choi_state(coeffs)
    a, b, d = coeffs.alpha, coeffs.beta, coeffs.delta
    k1 = math.sqrt(max(b, 0.0)) * SIGMA_PLUS
    k2 = math.sqrt(max(a, 0.0)) * SIGMA_MINUS
    block = chi[np.ix_([0, 3], [0, 3])]
    lam, vecs = np.linalg.eigh(block)
    diag_ops = []
    for val, v in zip(lam[::-1], vecs.T[::-1]):
        v = _positive_phase(v)
        diag_ops.append(math.sqrt(2 * max(val, 0.0)) * np.diag(v))
    x1, x2 = 2 * lam[1], 2 * lam[0]
    theta = math.atan2(d.imag, d.real)
    root = math.sqrt((a - b) ** 2 + 4 * abs(d) ** 2)
    if abs(d) > 0:
        y1 = (root - (a - b)) / (2 * abs(d))
        y2 = (root + (a - b)) / (2 * abs(d))
    else:
        y1 = y2 = math.nan
    return KrausSet(k1, k2, diag_ops[0], diag_ops[1], float(x1), float(x2), y1, y2, theta, chi)


def kraus_closed_form(coeffs: MapCoefficients) -> list[np.ndarray]:
    """Closed-form Kraus operators; singular when ``|Delta| -> 0``."""
    a, b, d = coeffs.alpha, coeffs.beta, coeffs.delta
    mod = abs(d)
    if mod <= 1e-10:
        raise DomainError("closed-form Kraus operators need |Delta| > 1e-10")
    root = math.sqrt((a - b) ** 2 + 4 * mod**2)
    x1 = 1 - (a + b) / 2 + root / 2
    x2 = 1 - (a + b) / 2 - root / 2
    y1 = (root - (a - b)) / (2 * mod)
    y2 = (root + (a - b)) / (2 * mod)
    phase = np.exp(1j * math.atan2(d.imag, d.real))
    k3 = math.sqrt(max(x1, 0.0) / (1 + y1**2)) * np.diag([y1 * phase, 1.0])
    # second eigenvector is orthogonal to the first: opposite sign on the Y term
    k4 = math.sqrt(max(x2, 0.0) / (1 + y2**2)) * np.diag([-y2 * phase, 1.0])
    return [math.sqrt(b) * SIGMA_PLUS, math.sqrt(a) * SIGMA_MINUS, k3, k4]


def apply_kraus(ks, rho: QubitState) -> QubitState:
    ops = ks.operators if isinstance(ks, KrausSet) else list(ks)
    completeness = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(completeness - np.eye(2))) > 1e-10:
        raise DomainError("Kraus set is not trace preserving")
    m = rho.matrix()
    out = sum(k @ m @ k.conj().T for k in ops)
    return QubitState(out[0, 0].real, out[0, 1])


@dataclass(frozen=True)
class DivisibilityIntegrals:
    """Running integrals of the three rates from 0 to ``time``.

    ``excluded`` lists the intervals dropped around rate poles.
    """

    time: float
    int_dis: float
    int_abs: float
    int_deph: float
    excluded: list

    @property
    def nonnegative(self) -> bool:
        return min(self.int_dis, self.int_abs, self.int_deph) >= -1e-8


def cp_divisibility_integrals(params: ModelParams, t: float, grid_step: float = 1e-3) -> DivisibilityIntegrals:
    """Trapezoidal integrals of the master-equation rates over ``[0, t]``."""
    from .thermo import POLE_EXCLUSION, find_poles, rate_series

    if t <= 0:
        raise DomainError("t must be > 0")
    steps = max(int(math.ceil(t / grid_step)), 2)
    times = np.linspace(0.0, t, steps + 1)
    poles = find_poles(params, t)
    keep = np.ones(times.size, dtype=bool)
    for tp in poles:
        keep &= np.abs(times - tp) > POLE_EXCLUSION
    rates = rate_series(params, times)
    finite = keep & ~rates.pole_flag
    vals = []
    for arr in (rates.gamma_dis, rates.gamma_abs, rates.gamma_deph):
        y = np.where(finite, arr, 0.0)
        vals.append(float(trapezoid(y, times)))
    excluded = [(max(tp - POLE_EXCLUSION, 0.0), min(tp + POLE_EXCLUSION, t)) for tp in poles]
    return DivisibilityIntegrals(float(t), vals[0], vals[1], vals[2], excluded)
