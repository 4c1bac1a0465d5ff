"""Long-time averages, resonant coherence and information trapping.

The Rabi factors of ``alpha`` and ``beta`` average to one half, so their long
time averages are plain level sums. ``Delta`` is a sum of pure tones::

    Delta(t) = sum_n w_n sum_{p,q = +-1} A_p(n) B_q(n) exp(-i nu t)
    nu = omega/2N + p eta/2 + q eta'/2

and only tones with ``nu = 0`` survive the average. This happens when
``omega/2N = |eta -+ eta'|/2`` at an integer level, the resonance condition.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from .core_map import QubitState, coefficient_series, level_data
from .params import DomainError, ModelParams

MATCH_TOLERANCE = 1e-9
INTEGER_TOLERANCE = 1e-6
DEFAULT_HORIZON = 1e3
HORIZON_CAP = 1e8


@dataclass(frozen=True)
class AveragedCoefficients:
    """Long-time averages of the map coefficients.

    ``delta_bar`` is ``None`` until set by :func:`delta_average`.
    """

    alpha_bar: float
    beta_bar: float
    delta_bar: complex | None = None
    horizon: float | None = None
    converged: bool = False

    @property
    def lambda_bar(self) -> float:
        return 1.0 - self.alpha_bar - self.beta_bar


def _fsum_positive(x: np.ndarray) -> float:
    return math.fsum(x.tolist())


def averaged_populations(params: ModelParams) -> AveragedCoefficients:
    """``alpha_bar = sum 2 g_n^2 w_n / eta^2`` and the matching sum for ``beta_bar``."""
    lv = level_data(params)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(lv.amp_alpha > 0, lv.amp_alpha / (2 * lv.eta**2), 0.0)
        b = np.where(lv.amp_beta > 0, lv.amp_beta / (2 * lv.eta_p**2), 0.0)
    return AveragedCoefficients(_fsum_positive(a), _fsum_positive(b))


# -- tone expansion of Delta -------------------------------------------------

@dataclass(frozen=True)
class ToneExpansion:
    """``Delta(t) = sum_k amplitude_k exp(-i frequency_k t)``."""

    amplitude: np.ndarray
    frequency: np.ndarray
    level: np.ndarray

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-1j * np.outer(t, self.frequency)) @ self.amplitude

    def resonant(self, tol: float = MATCH_TOLERANCE) -> np.ndarray:
        return (np.abs(self.frequency) <= tol) & (self.amplitude != 0)

    def cesaro(self, horizon: float) -> complex:
        """Exact ``(1/H) int_0^H Delta(t) dt``."""
        x = 0.5 * self.frequency * horizon
        return complex(np.sum(self.amplitude * np.exp(-1j * x) * np.sinc(x / np.pi)))


def tone_expansion(params: ModelParams) -> ToneExpansion:
    lv = level_data(params)
    sigma = params.branch.sign
    amps, freqs, levels = [], [], []
    for p in (1, -1):
        for q in (1, -1):
            amps.append(lv.weight * 0.5 * (1 + p * lv.ratio_a) * 0.5 * (1 - q * sigma * lv.ratio_b))
            freqs.append(lv.phase_rate + 0.5 * p * lv.eta + 0.5 * q * lv.eta_p)
            levels.append(lv.n.astype(int))
    return ToneExpansion(np.concatenate(amps), np.concatenate(freqs), np.concatenate(levels))


def resonant_delta(params: ModelParams, tol: float = MATCH_TOLERANCE) -> complex:
    """Sum of the zero-frequency tones of ``Delta``; exactly 0 when none exist."""
    tones = tone_expansion(params)
    mask = tones.resonant(tol)
    return complex(np.sum(tones.amplitude[mask])) if mask.any() else 0j


def cesaro_trapezoid(params: ModelParams, horizon: float, step: float | None = None,
                     chunk: int = 200_000) -> complex:
    """Trapezoidal ``(1/H) int_0^H Delta(t) dt`` on a grid resolving the fastest tone."""
    if horizon <= 0:
        raise DomainError("horizon must be > 0")
    if step is None:
        step = averaging_step(params)
    m = max(int(math.ceil(horizon / step)), 1)
    edges = np.linspace(0.0, horizon, m + 1)
    total = 0j
    for lo in range(0, m, chunk):
        t = edges[lo:min(lo + chunk, m) + 1]
        total += trapezoid(coefficient_series(params, t).delta, t)
    return total / horizon


def averaging_step(params: ModelParams) -> float:
    """``(1/20) 2 pi / eta_max`` including the overall phase rate."""
    lv = level_data(params)
    fastest = float(np.max(np.abs(tone_expansion(params).frequency)))
    fastest = max(fastest, float(lv.eta.max()), 1e-12)
    return 2 * math.pi / fastest / 20


@dataclass(frozen=True)
class DeltaAverage:
    value: complex
    horizon: float
    converged: bool
    resonant: bool
    history: list = field(default_factory=list)


def delta_average(params: ModelParams, tolerance: float = 1e-3, method: str = "exact",
                  horizon: float = DEFAULT_HORIZON, cap: float = HORIZON_CAP,
                  match_tol: float = MATCH_TOLERANCE) -> DeltaAverage:
    """Cesaro average of ``Delta`` over doubling horizons.

    Without a zero-frequency tone the average is exactly zero and returned
    directly. Otherwise horizons double from ``horizon`` until two successive
    estimates differ by at most ``tolerance`` (absolute) or ``cap`` is passed.
    ``method`` picks the exact tone integral or trapezoidal quadrature.
    """
    if tolerance <= 0:
        raise DomainError("tolerance must be > 0")
    if method not in ("exact", "trapezoid"):
        raise DomainError(f"unknown method {method!r}")
    tones = tone_expansion(params)
    if not tones.resonant(match_tol).any():
        return DeltaAverage(0j, 0.0, True, False)
    if method == "exact":
        estimate = tones.cesaro
    else:
        def estimate(h):
            return cesaro_trapezoid(params, h)
    h = horizon
    prev = estimate(h)
    history = [(h, prev)]
    while 2 * h <= cap:
        h *= 2
        cur = estimate(h)
        history.append((h, cur))
        if abs(cur - prev) <= tolerance:
            return DeltaAverage(cur, h, True, True, history)
        prev = cur
    return DeltaAverage(prev, h, False, True, history)


def averaged_coefficients(params: ModelParams, tolerance: float = 1e-3, method: str = "exact") -> AveragedCoefficients:
    avg = averaged_populations(params)
    d = delta_average(params, tolerance, method)
    return replace(avg, delta_bar=d.value, horizon=d.horizon, converged=d.converged)


def time_averaged_state(params: ModelParams, rho0: QubitState,
                        averages: AveragedCoefficients | None = None) -> QubitState:
    """``rho11 -> rho11 (1 - alpha_bar) + rho22 beta_bar``, ``rho12 -> rho12 Delta_bar``."""
    if averages is None or averages.delta_bar is None:
        averages = averaged_coefficients(params)
    rho11 = rho0.rho11 * (1 - averages.alpha_bar) + rho0.rho22 * averages.beta_bar
    return QubitState(rho11, rho0.rho12 * averages.delta_bar)


def population_ratio(params: ModelParams, rho11_0: float) -> float:
    """``rho11_bar / rho22_bar`` for initial excited population ``rho11_0``."""
    if not 0.0 <= rho11_0 <= 1.0:
        raise DomainError(f"rho11_0={rho11_0} outside [0, 1]")
    avg = averaged_populations(params)
    r11 = rho11_0 * (1 - avg.alpha_bar) + (1 - rho11_0) * avg.beta_bar
    return r11 / (1 - r11) if r11 < 1 else math.inf


# -- resonance ---------------------------------------------------------------

def frequency_mismatch(params: ModelParams, n, branch: str = "minus"):
    """``|eta(n) -+ eta'(n)|/2 - omega/2N`` for continuous ``n``."""
    n = np.asarray(n, dtype=float)
    N = params.n_bath
    d2 = params.detuning**2
    g2 = params.epsilon**2 * (n + 1) * (1 - n / (2 * N))
    g2p = params.epsilon**2 * n * (1 - (n - 1) / (2 * N))
    eta = np.sqrt(d2 + 4 * g2)
    eta_p = np.sqrt(d2 + 4 * np.maximum(g2p, 0.0))
    combo = eta - eta_p if branch == "minus" else eta + eta_p
    return 0.5 * np.abs(combo) - params.omega / (2 * N)


def quadratic_coefficients(params: ModelParams) -> tuple[float, float, float]:
    """``(A, B, C)`` with ``A n^2 - B n + C = 0`` equivalent (after squaring) to the minus branch."""
    e2 = params.epsilon**2
    w, w0, N = params.omega, params.omega0, params.n_bath
    a = e2 * e2 / N**2 + e2 * w**2 / (2 * N**3)
    b = 2 * e2 * e2 / N + e2 * w**2 / N**2
    c = w0 * w**3 / (4 * N**3) - w**2 * w0**2 / (4 * N**2) - e2 * w**2 / (2 * N**2) + e2 * e2
    return a, b, c


def quartic_coefficients(params: ModelParams) -> tuple[float, float, float, float]:
    e2 = params.epsilon**2
    w, w0 = params.omega, params.omega0
    return (e2 * e2,
            e2 * w**2 + e2 * w0**2 + 2 * e2 * e2,
            w**2 * w0**2 + 2 * e2 * w**2 - 2 * e2 * w * w0,
            2 * w0 * w**3)


def quartic_form_roots(params: ModelParams) -> list[float]:
    """Roots written through ``q1..q4``; must agree with the quadratic."""
    q1, q2, q3, q4 = quartic_coefficients(params)
    N, w, eps = params.n_bath, params.omega, params.epsilon
    rad = q1 / (8 * N**3) + q2 / (16 * N**4) + q3 / (32 * N**5) - q4 / (64 * N**6)
    if rad < 0:
        return []
    half = 0.5 * eps * w * math.sqrt(rad) / (eps**4 / (4 * N**2) + eps**2 * w**2 / (8 * N**3))
    return [N - half, N + half]


@dataclass(frozen=True)
class ResonanceReport:
    """Resonance analysis of one branch at one coupling.

    ``roots`` are the real solutions of the branch condition in ``[0, N]``;
    ``integer_levels`` those within ``INTEGER_TOLERANCE`` of an integer whose
    frequency mismatch at the integer is at most ``MATCH_TOLERANCE``.
    """

    branch: str
    integer_levels: list
    epsilon_candidates: list
    q1: float
    q2: float
    q3: float
    q4: float
    roots: list = field(default_factory=list)
    mismatch: list = field(default_factory=list)
    excluded: bool = False


def _integer_hits(params, roots, branch):
    levels, mism = [], []
    for r in roots:
        k = round(r)
        if abs(r - k) <= INTEGER_TOLERANCE and 0 <= k <= params.n_bath:
            m = float(abs(frequency_mismatch(params, k, branch)))
            if m <= MATCH_TOLERANCE:
                levels.append(int(k))
                mism.append(m)
    return levels, mism


def _plus_roots(params: ModelParams) -> list[float]:
    n = np.linspace(0.0, params.n_bath, 64 * params.n_bath + 1)
    f = frequency_mismatch(params, n, "plus")
    roots = [float(x) for x in n[f == 0]]
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
        roots.append(brentq(lambda x: float(frequency_mismatch(params, x, "plus")), n[i], n[i + 1], xtol=1e-14))
    return sorted(roots)


def resonance_levels(params: ModelParams, branch: str = "minus") -> ResonanceReport:
    """Levels at which the long-time average of ``Delta`` can be nonzero.

    The minus branch ``eta - eta' = omega/N`` is solved through its quadratic in
    ``n``; each root is kept only if it satisfies the unsquared condition. The
    plus branch is only possible for ``N <= omega/omega0`` and is otherwise
    reported as excluded.
    """
    if params.epsilon <= 0:
        raise DomainError("resonance analysis needs epsilon > 0")
    q = quartic_coefficients(params)
    N = params.n_bath
    if branch == "plus":
        if params.omega0 > 0 and N > params.omega / params.omega0:
            return ResonanceReport("plus", [], [], *q, excluded=True)
        roots = _plus_roots(params)
    elif branch == "minus":
        a, b, c = quadratic_coefficients(params)
        disc = b * b - 4 * a * c
        roots = []
        if disc >= 0:
            for s in (-1, 1):
                r = (b + s * math.sqrt(disc)) / (2 * a)
                # squaring admits eta' - eta = omega/N as well
                if -INTEGER_TOLERANCE <= r <= N + INTEGER_TOLERANCE and \
                        abs(frequency_mismatch(params, min(max(r, 0.0), N))) <= 1e-6 * max(1.0, params.omega):
                    roots.append(r)
    else:
        raise DomainError(f"unknown branch {branch!r}")
    levels, mism = _integer_hits(params, roots, branch)
    eps = [params.epsilon] if levels else []
    return ResonanceReport(branch, levels, eps, *q, roots=roots, mismatch=mism)


def simplified_candidates(n_bath: int, eps_range: tuple[float, float]) -> list[float]:
    """Couplings with ``N -+ sqrt(N)/(eps sqrt 2)`` integral, valid for ``omega = omega0 = 1``, large N."""
    lo, hi = eps_range
    if lo <= 0:
        raise DomainError("epsilon range must be positive")
    root = math.sqrt(n_bath / 2)
    # sqrt(N)/(eps sqrt 2) = m  ->  eps = sqrt(N/2)/m
    m_lo = max(int(math.ceil(root / hi)), 1)
    m_hi = int(math.floor(root / lo))
    return sorted(root / m for m in range(m_lo, min(m_hi, n_bath) + 1))


def _mismatch_in_epsilon(params: ModelParams, k: int, eps, branch: str = "minus"):
    eps = np.asarray(eps, dtype=float)
    N = params.n_bath
    d2 = params.detuning**2
    eta = np.sqrt(d2 + 4 * eps**2 * (k + 1) * (1 - k / (2 * N)))
    eta_p = np.sqrt(d2 + 4 * eps**2 * k * (1 - (k - 1) / (2 * N)))
    sign = -1.0 if branch == "minus" else 1.0
    return 0.5 * (eta + sign * eta_p) - params.omega / (2 * N)


def _scan_level(args):
    params, k, grid, branch = args
    vals = _mismatch_in_epsilon(params, k, grid, branch)
    hits = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0):
        if vals[i] == 0:
            hits.append(float(grid[i]))
        elif vals[i + 1] != 0:
            hits.append(brentq(lambda e: float(_mismatch_in_epsilon(params, k, e, branch)), grid[i], grid[i + 1],
                               xtol=1e-15))
    return [(e, k) for e in hits]


def resonance_scan(base: ModelParams, eps_range: tuple[float, float], count: int = 1000,
                   workers: int | None = None, verify_threshold: float = 1e-6,
                   branch: str = "minus") -> list[ResonanceReport]:
    """Couplings in ``eps_range`` at which some integer level is exactly resonant.

    For each level the mismatch of ``branch`` is tabulated on ``count`` grid
    couplings; sign changes are refined by Brent's method. A hit is kept when
    the zero-frequency part of ``Delta`` exceeds ``verify_threshold`` in modulus.
    Results are ordered by coupling, independent of ``workers``.
    """
    lo, hi = eps_range
    if not 0 < lo < hi:
        raise DomainError("need 0 < eps_lo < eps_hi")
    if count < 2:
        raise DomainError("count must be >= 2")
    if branch not in ("minus", "plus"):
        raise DomainError(f"unknown branch {branch!r}")
    if branch == "plus" and base.omega0 > 0 and base.n_bath > base.omega / base.omega0:
        return []
    grid = np.linspace(lo, hi, count)
    tasks = [(base, k, grid, branch) for k in range(base.n_bath + 1)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_scan_level, tasks))
    else:
        chunks = [_scan_level(t) for t in tasks]
    found = sorted(h for chunk in chunks for h in chunk)
    reports = []
    for eps, k in found:
        p = base.replace(epsilon=eps)
        if abs(resonant_delta(p)) <= verify_threshold:
            continue
        rep = resonance_levels(p, branch)
        levels = sorted(set(rep.integer_levels) | {k})
        mism = [float(abs(frequency_mismatch(p, n, branch))) for n in levels]
        reports.append(replace(rep, integer_levels=levels, epsilon_candidates=[eps], mismatch=mism))
    return reports


# -- information trapping ----------------------------------------------------

def information_trapping(params: ModelParams) -> float:
    """``|beta_bar - alpha_bar|``."""
    avg = averaged_populations(params)
    return abs(avg.beta_bar - avg.alpha_bar)


@dataclass(frozen=True)
class TrappingNumeric:
    """Grid maximum of the idempotence defect of the averaging map.

    ``trace_distance`` uses half the trace norm, ``trace_norm`` the full norm;
    ``pure_max`` and ``ball_max`` restrict the half-norm maximum to the sphere
    and to interior shells respectively.
    """

    trace_distance: float
    trace_norm: float
    pure_max: float
    ball_max: float
    closed_form: float
    delta_bar: complex

    @property
    def ratio(self) -> float:
        return self.trace_distance / self.closed_form if self.closed_form > 0 else math.nan


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = math.pi * (1 + math.sqrt(5)) * i
    r = np.sqrt(1 - z * z)
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    # the poles are where the population part peaks
    return np.vstack([pts, [[0, 0, 1], [0, 0, -1]]])


def trapping_numeric(params: ModelParams, grid: int | np.ndarray = 2000, shells: int = 10,
                     averages: AveragedCoefficients | None = None) -> TrappingNumeric:
    """Maximise ``D(Lbar^2 rho, Lbar rho)`` over Bloch vectors.

    ``grid`` is either a point count for a Fibonacci sphere or an explicit
    array of unit Bloch vectors; the ball is covered by scaling the sphere.
    """
    if averages is None or averages.delta_bar is None:
        averages = averaged_coefficients(params)
    a, b, d = averages.alpha_bar, averages.beta_bar, averages.delta_bar
    lam = 1 - a - b
    c = b - a
    sphere = fibonacci_sphere(grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)

    def defect(v):
        # Lbar: z -> lam z + c, (x - i y) -> Delta (x - i y)
        z = v[:, 2]
        xy = v[:, 0] - 1j * v[:, 1]
        dz = lam * (lam - 1) * z + lam * c
        dxy = (d * d - d) * xy
        return 0.5 * np.sqrt(dz**2 + np.abs(dxy) ** 2)

    pure = float(np.max(defect(sphere)))
    ball = max(float(np.max(defect(sphere * r))) for r in np.linspace(0.0, 1.0, shells + 1))
    return TrappingNumeric(max(pure, ball), 2 * max(pure, ball), pure, ball, abs(c), d)
