"""Coherence and entanglement of the central qubit under the map."""
from __future__ import annotations

import math

import numpy as np

from .core_map import MapCoefficients, QubitState, coefficient_series, map_coefficients
from .params import DomainError, ModelParams

_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def l1_coherence(rho: QubitState) -> float:
    return 2.0 * abs(rho.rho12)


def coherence_evolution(params: ModelParams, c0: float, t) -> float | np.ndarray:
    """``C(t) = c0 |Delta(t)|``; ``t`` may be a scalar or an array."""
    if not 0.0 <= c0 <= 1.0:
        raise DomainError(f"c0={c0} outside [0, 1]")
    s = coefficient_series(params, t)
    out = c0 * np.abs(s.delta)
    return float(out[0]) if np.ndim(t) == 0 else out


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10 or abs(np.trace(rho) - 1) > 1e-10:
        raise DomainError("matrix is not a unit-trace Hermitian matrix")
    if np.linalg.eigvalsh(rho)[0] < -1e-12:
        raise DomainError("two-qubit state is not positive semidefinite")
    rho_tilde = _SYSY @ rho.conj() @ _SYSY
    ev = np.linalg.eigvals(rho @ rho_tilde).real
    # tiny negative eigenvalues are rounding noise
    lam = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def choi_concurrence(coeffs: MapCoefficients) -> float:
    """Entanglement of the CJ state, ``max(0, |Delta| - sqrt(alpha beta))``."""
    return max(0.0, abs(coeffs.delta) - math.sqrt(max(coeffs.alpha * coeffs.beta, 0.0)))


def entanglement_evolution(params: ModelParams, e0: float, t) -> float | np.ndarray:
    """Concurrence of system+ancilla at ``t`` for initial concurrence ``e0``."""
    if not 0.0 <= e0 <= 1.0:
        raise DomainError(f"e0={e0} outside [0, 1]")
    s = coefficient_series(params, t)
    out = e0 * np.maximum(0.0, np.abs(s.delta) - np.sqrt(np.clip(s.alpha * s.beta, 0.0, None)))
    return float(out[0]) if np.ndim(t) == 0 else out


def bell_state() -> np.ndarray:
    v = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return np.outer(v, v).astype(complex)


def werner_state(p: float) -> np.ndarray:
    return p * bell_state() + (1 - p) * np.eye(4) / 4


def sudden_death_time(params: ModelParams, t_end: float, steps: int = 20001) -> float | None:
    """First grid time at which the evolved entanglement is exactly zero."""
    times = np.linspace(0.0, t_end, steps)
    e = entanglement_evolution(params, 1.0, times)
    idx = np.flatnonzero(e == 0.0)
    return float(times[idx[0]]) if idx.size else None


def coherence_threshold_time(params: ModelParams, fraction: float, t_end: float, steps: int = 20001) -> float | None:
    """First time ``C(t)/C(0)`` drops below ``fraction``, refined by bisection."""
    times = np.linspace(0.0, t_end, steps)
    ratio = coherence_evolution(params, 1.0, times)
    below = np.flatnonzero(ratio < fraction)
    if not below.size:
        return None
    i = below[0]
    lo, hi = times[i - 1], times[i]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if abs(map_coefficients(params, mid).delta) < fraction:
            hi = mid
        else:
            lo = mid
    return float(hi)
