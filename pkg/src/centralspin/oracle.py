"""Brute-force validators for the closed-form map.

Two routes independent of :mod:`centralspin.core_map`:

* :func:`integrate_blocks` integrates the per-level Schrodinger equations for
  the amplitude operators numerically, and :func:`assemble_map_from_blocks`
  traces the bath out of those amplitudes.
* :func:`joint_unitary_evolve` builds the full system-plus-boson Hamiltonian,
  exponentiates it and takes the partial trace.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .params import DomainError, ModelParams, NumericalError

MAX_DENSE_BATH = 64


@dataclass(frozen=True)
class BlockAmplitudes:
    """Amplitudes of the excited block ``(A1, B1)`` and ground block ``(C1, D1)``.

    ``unitarity_defect`` is the largest deviation of ``|A1|^2 + (n+1)|B1|^2``
    and ``|C1|^2 + n|D1|^2`` from 1 seen at any accepted integrator step.
    """

    level: np.ndarray
    time: float
    a1: np.ndarray
    b1: np.ndarray
    c1: np.ndarray
    d1: np.ndarray
    unitarity_defect: float


def _block_generator(params: ModelParams, n: np.ndarray) -> np.ndarray:
    """Per-level 4x4 generators ``M`` with ``d/dt (A1, B1, C1, D1) = M (A1, B1, C1, D1)``."""
    w0, w, eps, N = params.omega0, params.omega, params.epsilon, params.n_bath
    f0 = 1.0 - n / (2 * N)
    fp = 1.0 - (n + 1) / (2 * N)
    fm = 1.0 - (n - 1) / (2 * N)
    m = np.zeros((n.size, 4, 4), dtype=complex)
    m[:, 0, 0] = -1j * (w0 / 2 - w * f0)
    m[:, 0, 1] = -1j * eps * np.sqrt(f0) * (n + 1)
    m[:, 1, 1] = 1j * (w0 / 2 + w * fp)
    m[:, 1, 0] = -1j * eps * np.sqrt(f0)
    m[:, 2, 2] = 1j * (w0 / 2 + w * f0)
    m[:, 2, 3] = -1j * eps * n * np.sqrt(fm)
    m[:, 3, 3] = -1j * (w0 / 2 - w * fm)
    m[:, 3, 2] = -1j * eps * np.sqrt(fm)
    return m


def _integrate_levels(params: ModelParams, levels: np.ndarray, t: float, tol: float) -> BlockAmplitudes:
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if t < 0:
        raise DomainError("t must be >= 0")
    n = np.asarray(levels, dtype=float)
    gen = _block_generator(params, n)
    y0 = np.zeros((n.size, 4), dtype=complex)
    y0[:, 0] = 1.0
    y0[:, 2] = 1.0
    if t == 0:
        y = y0
        defect = 0.0
    else:
        def rhs(_t, y):
            return np.einsum("kij,kj->ki", gen, y.reshape(n.size, 4)).ravel()

        sol = solve_ivp(rhs, (0.0, t), y0.ravel(), method="RK45", rtol=tol, atol=tol * 1e-2)
        if not sol.success:
            raise NumericalError(f"block integration failed: {sol.message}")
        ys = sol.y.reshape(n.size, 4, -1)
        norm_a = np.abs(ys[:, 0]) ** 2 + (n + 1)[:, None] * np.abs(ys[:, 1]) ** 2
        norm_c = np.abs(ys[:, 2]) ** 2 + n[:, None] * np.abs(ys[:, 3]) ** 2
        defect = float(max(np.max(np.abs(norm_a - 1)), np.max(np.abs(norm_c - 1))))
        y = ys[:, :, -1]
    return BlockAmplitudes(n.astype(int), float(t), y[:, 0], y[:, 1], y[:, 2], y[:, 3], defect)


def integrate_blocks(params: ModelParams, n: int, t: float, tol: float = 1e-10) -> BlockAmplitudes:
    """Integrate the two 2x2 amplitude systems of level ``n`` up to ``t``."""
    if int(n) != n or not 0 <= n <= params.n_bath:
        raise DomainError(f"level n={n!r} outside [0, {params.n_bath}]")
    return _integrate_levels(params, np.array([n]), t, tol)


def assemble_map_from_blocks(params: ModelParams, t: float, tol: float = 1e-10):
    """Map coefficients built only from integrated block amplitudes."""
    from .core_map import MapCoefficients, thermal_weights

    N = params.n_bath
    amps = _integrate_levels(params, np.arange(N + 1), t, tol)
    w = thermal_weights(params)
    n = np.arange(N + 1)
    alpha = float(np.sum((n + 1) * np.abs(amps.b1) ** 2 * w))
    beta = float(np.sum(n * np.abs(amps.d1) ** 2 * w))
    delta = complex(np.sum(amps.a1 * np.conj(amps.c1) * w))
    return MapCoefficients(alpha, beta, delta, float(t))


# -- dense joint evolution ---------------------------------------------------

def boson_dimension(params: ModelParams) -> int:
    # thermal weight lives on 0..N; level N+1 is reachable from |1, N>
    return params.n_bath + 2


def joint_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense ``H_S + H_B + H_SB`` on (qubit) x (bosons ``0..N+1``), qubit index 0 = excited."""
    N = params.n_bath
    dim = boson_dimension(params)
    levels = np.arange(dim, dtype=float)
    b = np.diag(np.sqrt(levels[1:]), 1)
    hp = np.diag(np.sqrt(np.clip(1.0 - levels / (2 * N), 0.0, None)))
    sz = np.diag([1.0, -1.0])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])
    eye_b = np.eye(dim)
    h_s = 0.5 * params.omega0 * np.kron(sz, eye_b)
    h_b = np.kron(np.eye(2), -0.5 * params.omega * np.diag(1.0 - levels / N))
    h_sb = params.epsilon * (np.kron(sp, hp @ b) + np.kron(sp.T, b.T @ hp))
    return h_s + h_b + h_sb


def excitation_operator(params: ModelParams) -> np.ndarray:
    dim = boson_dimension(params)
    return np.kron(np.diag([0.5, -0.5]), np.eye(dim)) + np.kron(np.eye(2), np.diag(np.arange(dim, dtype=float)))


def thermal_bath_state(params: ModelParams) -> np.ndarray:
    from .core_map import thermal_weights

    w = np.zeros(boson_dimension(params))
    w[: params.n_bath + 1] = thermal_weights(params)
    return np.diag(w)


def partial_trace_bath(rho: np.ndarray, dim_bath: int) -> np.ndarray:
    return np.trace(rho.reshape(2, dim_bath, 2, dim_bath), axis1=1, axis2=3)


def joint_unitary_evolve(params: ModelParams, rho_sys0, t: float):
    """Exact reduced state from the dense joint unitary ``exp(-iHt)``."""
    from .core_map import QubitState

    if params.n_bath > MAX_DENSE_BATH:
        raise DomainError(
            f"n_bath={params.n_bath} too large for dense evolution (max {MAX_DENSE_BATH}); "
            "use assemble_map_from_blocks instead"
        )
    h = joint_hamiltonian(params)
    evals, evecs = np.linalg.eigh(h)
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    rho0 = np.kron(rho_sys0.matrix(), thermal_bath_state(params))
    rho_t = u @ rho0 @ u.conj().T
    reduced = partial_trace_bath(rho_t, boson_dimension(params))
    return QubitState(reduced[0, 0].real, reduced[0, 1])


# -- equivalence suite -------------------------------------------------------

SUITE_BATHS = (1, 2, 5, 10)
SUITE_TEMPERATURES = (0.1, 1.0, 10.0, float("inf"))
SUITE_COUPLINGS = (0.1, 0.5, 1.0)


@dataclass(frozen=True)
class SuiteReport:
    """Largest deviations of the closed form from both brute-force routes.

    ``block_deviation`` is the max over points of the largest of
    ``|d alpha|``, ``|d beta|`` and ``|d Delta|``; ``joint_deviation`` the max
    entrywise state difference against dense evolution of a random state.
    """

    points: int
    seed: int
    tolerance: float
    block_deviation: float
    joint_deviation: float
    worst_point: dict

    @property
    def passed(self) -> bool:
        return self.block_deviation <= self.tolerance and self.joint_deviation <= self.tolerance


def random_grid(points: int, seed: int = 0, t_max: float = 50.0, baths=SUITE_BATHS,
                temperatures=SUITE_TEMPERATURES, couplings=SUITE_COUPLINGS) -> list[tuple[ModelParams, float]]:
    """Reproducible ``(params, t)`` samples; ``omega0 = omega = 1``."""
    rng = np.random.default_rng(seed)
    grid = []
    for _ in range(points):
        p = ModelParams(1.0, 1.0, float(rng.choice(couplings)), int(rng.choice(baths)),
                        float(rng.choice(temperatures)))
        grid.append((p, float(rng.uniform(0.0, t_max))))
    return grid


def oracle_suite(points: int = 200, seed: int = 0, tolerance: float = 1e-8,
                 ode_tol: float = 1e-12, grid=None) -> SuiteReport:
    """Compare :func:`core_map.map_coefficients` and :func:`core_map.evolve` with both oracles."""
    from .core_map import QubitState, evolve, map_coefficients

    if tolerance <= 0:
        raise DomainError("tolerance must be > 0")
    grid = random_grid(points, seed) if grid is None else list(grid)
    rng = np.random.default_rng(seed + 1)
    block = joint = 0.0
    worst, worst_dev = {}, -1.0
    for p, t in grid:
        exact = map_coefficients(p, t)
        brute = assemble_map_from_blocks(p, t, ode_tol)
        d_block = max(abs(exact.alpha - brute.alpha), abs(exact.beta - brute.beta), abs(exact.delta - brute.delta))
        d_joint = 0.0
        if p.n_bath <= MAX_DENSE_BATH:
            v = rng.normal(size=3)
            v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
            rho0 = QubitState.from_bloch(*v)
            a, b = evolve(p, rho0, t), joint_unitary_evolve(p, rho0, t)
            d_joint = max(abs(a.rho11 - b.rho11), abs(a.rho12 - b.rho12))
        block, joint = max(block, d_block), max(joint, d_joint)
        if max(d_block, d_joint) > worst_dev:
            worst_dev = max(d_block, d_joint)
            worst = dict(p.as_dict(), t=t, block=d_block, joint=d_joint)
    return SuiteReport(len(grid), seed, tolerance, float(block), float(joint), worst)
