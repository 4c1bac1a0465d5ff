"""Exact time-local master equation and its thermodynamic diagnostics.

The map is reproduced by the generator::

    d rho/dt = i delta [rho, sz] + G_deph (sz rho sz - rho)
               + G_dis D[s-](rho) + G_abs D[s+](rho)

with ``D[A](rho) = A rho A^+ - {A^+ A, rho}/2``. All four rates follow from
``alpha, beta, Delta`` and their analytic time derivatives; with
``lambda = 1 - alpha - beta``::

    G_dis  =  (a' - b')/2 - (a - b + 1)/2 * lambda'/lambda
    G_abs  = -(a' - b')/2 + (a - b - 1)/2 * lambda'/lambda
    G_deph =  (lambda'/lambda - 2 Re(Delta' Delta*)/|Delta|^2) / 4
    delta  = -Im(Delta' Delta*) / (2 |Delta|^2)

The rates blow up where ``lambda`` or ``Delta`` vanish; those times are poles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core_map import CoefficientSeries, QubitState, coefficient_series, level_data
from .params import DomainError, ModelParams, NumericalError

POLE_THRESHOLD = 1e-10
POLE_EXCLUSION = 1e-3
# near-misses of |Delta| or |lambda| below this are treated as poles when scanning
NEAR_POLE = 1e-6


@dataclass(frozen=True)
class LindbladRates:
    gamma_dis: float
    gamma_abs: float
    gamma_deph: float
    delta_shift: float
    time: float
    pole_flag: bool = False

    def min_rate(self) -> float:
        return min(self.gamma_dis, self.gamma_abs, self.gamma_deph)


@dataclass(frozen=True)
class RateSeries:
    """Rates on a time grid together with the coefficients they came from."""

    times: np.ndarray
    gamma_dis: np.ndarray
    gamma_abs: np.ndarray
    gamma_deph: np.ndarray
    delta_shift: np.ndarray
    pole_flag: np.ndarray
    coefficients: CoefficientSeries

    def at(self, i: int) -> LindbladRates:
        return LindbladRates(float(self.gamma_dis[i]), float(self.gamma_abs[i]), float(self.gamma_deph[i]),
                             float(self.delta_shift[i]), float(self.times[i]), bool(self.pole_flag[i]))


def _signed_inf(x):
    out = np.where(x > 0, np.inf, np.where(x < 0, -np.inf, np.nan))
    return out


def _rates(s: CoefficientSeries):
    a, b, d = s.alpha, s.beta, s.delta
    da, db, dd = s.d_alpha, s.d_beta, s.d_delta
    lam = 1.0 - a - b
    dlam = -da - db
    mod2 = np.abs(d) ** 2
    cross = dd * np.conj(d)
    lam_pole = np.abs(lam) < POLE_THRESHOLD
    delta_pole = np.sqrt(mod2) < POLE_THRESHOLD
    with np.errstate(divide="ignore", invalid="ignore"):
        rl = dlam / lam
        g_dis = 0.5 * (da - db) - 0.5 * (a - b + 1.0) * rl
        g_abs = -0.5 * (da - db) + 0.5 * (a - b - 1.0) * rl
        g_deph = 0.25 * (rl - 2.0 * cross.real / mod2)
        shift = -0.5 * cross.imag / mod2
    if np.any(lam_pole):
        g_dis = np.where(lam_pole, _signed_inf(-(a - b + 1.0) * dlam * lam), g_dis)
        g_abs = np.where(lam_pole, _signed_inf((a - b - 1.0) * dlam * lam), g_abs)
        g_deph = np.where(lam_pole & ~delta_pole, _signed_inf(dlam * lam), g_deph)
    if np.any(delta_pole):
        g_deph = np.where(delta_pole, _signed_inf(-cross.real), g_deph)
        shift = np.where(delta_pole, _signed_inf(-cross.imag), shift)
    return g_dis, g_abs, g_deph, shift, lam_pole | delta_pole


def rate_series(params: ModelParams, times) -> RateSeries:
    """Vectorised :func:`lindblad_rates` over ``times``."""
    s = coefficient_series(params, times, derivatives=True)
    g_dis, g_abs, g_deph, shift, pole = _rates(s)
    if params.epsilon == 0:
        # a pure rotation: the decay rates vanish identically, only rounding is left
        g_dis, g_abs, g_deph = (np.zeros_like(g_dis) for _ in range(3))
    return RateSeries(s.times, g_dis, g_abs, g_deph, shift, pole, s)


def lindblad_rates(params: ModelParams, t: float) -> LindbladRates:
    """Dissipation, absorption and dephasing rates and the frequency shift at ``t``.

    Poles (``|1 - alpha - beta|`` or ``|Delta|`` below 1e-10) are flagged and the
    affected rates carry the sign of their divergence as infinities.
    """
    if t < 0:
        raise DomainError(f"t={t} must be >= 0")
    return rate_series(params, [t]).at(0)


# -- poles -------------------------------------------------------------------

def scan_step(params: ModelParams) -> float:
    """Grid spacing that resolves the fastest level frequency twenty times per period."""
    lv = level_data(params)
    fastest = max(float(lv.eta.max()), float(lv.eta_p.max()), lv.phase_rate, 1e-12)
    return 2 * math.pi / fastest / 20


def bisect_roots(fn, lo, hi, xtol: float = 1e-9, max_iter: int = 60) -> np.ndarray:
    """Refine sign-change brackets ``[lo_k, hi_k]`` of ``fn`` all at once.

    Illinois false position: keeps the bracket and converges superlinearly.
    Each pass is one vectorised call of ``fn`` on the brackets still open.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    if a.size == 0:
        return a
    fa = np.asarray(fn(a), dtype=float)
    fb = np.asarray(fn(b), dtype=float)
    side = np.zeros(a.size, dtype=int)
    for _ in range(max_iter):
        act = np.flatnonzero((b - a) > xtol)
        if act.size == 0:
            break
        aa, bb, ffa, ffb = a[act], b[act], fa[act], fb[act]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (aa * ffb - bb * ffa) / (ffb - ffa)
        bad = ~np.isfinite(x) | (x <= aa) | (x >= bb)
        x = np.where(bad, 0.5 * (aa + bb), x)
        fx = np.asarray(fn(x), dtype=float)
        left = np.sign(fx) == np.sign(ffa)
        hit = fx == 0
        st = side[act]
        # Illinois: halve the stale end when the same side moves twice
        new_fb = np.where(left & (st == 1), 0.5 * ffb, ffb)
        new_fa = np.where(~left & (st == -1), 0.5 * ffa, ffa)
        a[act] = np.where(hit, x, np.where(left, x, aa))
        b[act] = np.where(hit, x, np.where(left, bb, x))
        fa[act] = np.where(left, fx, new_fa)
        fb[act] = np.where(left, new_fb, fx)
        side[act] = np.where(left, 1, -1)
    return np.where(np.abs(fa) <= np.abs(fb), a, b)


def golden_minima(fn, lo, hi, iterations: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section search for minima of ``fn`` in every bracket at once."""
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    if a.size == 0:
        return a, a
    r = (math.sqrt(5) - 1) / 2
    c = b - r * (b - a)
    d = a + r * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        left = fc < fd
        # keep [a, d] when the left probe is lower, else [c, b]; one new probe each
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        keep_x = np.where(left, c, d)
        keep_f = np.where(left, fc, fd)
        new_x = np.where(left, b - r * (b - a), a + r * (b - a))
        new_f = fn(new_x)
        c = np.where(left, new_x, keep_x)
        fc = np.where(left, new_f, keep_f)
        d = np.where(left, keep_x, new_x)
        fd = np.where(left, keep_f, new_f)
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def _candidate_minima(sq: np.ndarray, threshold: float) -> np.ndarray:
    """Grid minima of a squared modulus whose parabolic fit may dip below ``threshold``."""
    inner = np.flatnonzero((sq[1:-1] <= sq[:-2]) & (sq[1:-1] <= sq[2:])) + 1
    fm, f0, fp = sq[inner - 1], sq[inner], sq[inner + 1]
    curv = fp - 2 * f0 + fm
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(curv > 0, f0 - (fp - fm) ** 2 / (8 * curv), 0.0)
    # generous margin: the fit is only second-order accurate
    return inner[est < (10 * threshold) ** 2 + 1e-3 * f0]


def _poles_on_grid(params, times, lam, delta, threshold):
    def lam_at(t):
        c = coefficient_series(params, t)
        return 1.0 - c.alpha - c.beta

    def abs_lam(t):
        return np.abs(lam_at(t))

    def mod_at(t):
        return np.abs(coefficient_series(params, t).delta)

    idx = np.flatnonzero(np.sign(lam[:-1]) * np.sign(lam[1:]) < 0)
    poles = list(bisect_roots(lam_at, times[idx], times[idx + 1]))
    poles += list(times[lam == 0])
    for sq, fn in ((lam * lam, abs_lam), (np.abs(delta) ** 2, mod_at)):
        inner = _candidate_minima(sq, threshold)
        x, fx = golden_minima(fn, times[inner - 1], times[inner + 1])
        poles += list(x[fx < threshold])
    poles.sort()
    merged = []
    for p in poles:
        if not merged or p - merged[-1] > POLE_EXCLUSION:
            merged.append(float(p))
    return merged


def scan_grid(params: ModelParams, t_start: float, t_end: float) -> np.ndarray:
    m = max(int(math.ceil((t_end - t_start) / scan_step(params))), 2)
    return np.linspace(t_start, t_end, m + 1)


def find_poles(params: ModelParams, t_end: float, t_start: float = 0.0,
               threshold: float = NEAR_POLE) -> list[float]:
    """Times in ``[t_start, t_end]`` where ``1 - alpha - beta`` or ``|Delta|`` vanish.

    Sign changes of ``lambda`` are bracketed on a grid resolving the fastest
    level and refined by bisection. Grid minima of ``lambda^2`` and
    ``|Delta|^2`` whose parabolic fit comes near zero are refined by
    golden-section search and kept when the refined modulus is below
    ``threshold``.
    """
    if params.epsilon == 0 or t_end <= t_start:
        return []
    times = scan_grid(params, t_start, t_end)
    s = coefficient_series(params, times)
    return _poles_on_grid(params, times, 1.0 - s.alpha - s.beta, s.delta, threshold)


# -- master equation ---------------------------------------------------------

@dataclass(frozen=True)
class MasterSolution:
    """Integrated trajectory; ``halted_at`` is set when a pole cut the window short."""

    times: np.ndarray
    rho11: np.ndarray
    rho12: np.ndarray
    poles: list = field(default_factory=list)
    halted_at: float | None = None

    def state(self, i: int) -> QubitState:
        return QubitState(self.rho11[i], self.rho12[i])


def master_rhs(rates: LindbladRates, rho11: float, rho12: complex) -> tuple[float, complex]:
    """Right-hand side of the master equation for one set of rates."""
    g_dis, g_abs = rates.gamma_dis, rates.gamma_abs
    d11 = -g_dis * rho11 + g_abs * (1.0 - rho11)
    d12 = (-2j * rates.delta_shift - 2.0 * rates.gamma_deph - 0.5 * (g_dis + g_abs)) * rho12
    return d11, d12


def integrate_master(params: ModelParams, rho0: QubitState, t_end: float, tol: float = 1e-8,
                     t_eval=None) -> MasterSolution:
    """Integrate the master equation from ``rho0`` with adaptive steps.

    The window stops ``POLE_EXCLUSION`` before the first pole; the partial
    trajectory is returned with ``halted_at`` and the pole list filled in.
    """
    if t_end < 0:
        raise DomainError("t_end must be >= 0")
    if tol <= 0:
        raise DomainError("tol must be > 0")
    poles = find_poles(params, t_end)
    stop = t_end
    halted = None
    if poles:
        halted = poles[0]
        stop = max(poles[0] - POLE_EXCLUSION, 0.0)
    if t_eval is None:
        t_eval = np.linspace(0.0, stop, 101)
    t_eval = np.asarray(t_eval, dtype=float)
    t_eval = t_eval[t_eval <= stop]
    y0 = np.array([rho0.rho11, rho0.rho12.real, rho0.rho12.imag])
    if stop == 0.0:
        return MasterSolution(np.zeros(1), y0[:1].copy(), np.array([rho0.rho12]), poles, halted)

    def rhs(t, y):
        r = lindblad_rates(params, t)
        if r.pole_flag:
            raise NumericalError(f"rate pole hit at t={t}")
        d11, d12 = master_rhs(r, y[0], complex(y[1], y[2]))
        return [d11, d12.real, d12.imag]

    sol = solve_ivp(rhs, (0.0, stop), y0, method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=t_eval)
    if not sol.success:
        raise NumericalError(f"master-equation integration failed: {sol.message}")
    return MasterSolution(sol.t, sol.y[0], sol.y[1] + 1j * sol.y[2], poles, halted)


def near_pole_mask(params: ModelParams, times) -> np.ndarray:
    """``True`` where a sample lies within ``POLE_EXCLUSION`` of a located pole."""
    times = np.asarray(times, dtype=float)
    mask = np.zeros(times.shape, dtype=bool)
    if times.size == 0 or params.epsilon == 0:
        return mask
    for tp in find_poles(params, float(times.max()), float(times.min())):
        mask |= np.abs(times - tp) <= POLE_EXCLUSION
    return mask


def pole_free_windows(params: ModelParams, t_end: float, t_start: float = 0.0) -> list[tuple[float, float]]:
    """Sub-intervals of ``[t_start, t_end]`` kept ``POLE_EXCLUSION`` away from every pole."""
    poles = find_poles(params, t_end, t_start)
    edges = [t_start] + [x for p in poles for x in (p - POLE_EXCLUSION, p + POLE_EXCLUSION)] + [t_end]
    windows = []
    for lo, hi in zip(edges[::2], edges[1::2]):
        lo, hi = max(lo, t_start), min(hi, t_end)
        if hi > lo:
            windows.append((lo, hi))
    return windows


def integrate_windows(params: ModelParams, rho0: QubitState, t_end: float, tol: float = 1e-8,
                      points: int = 51) -> list[MasterSolution]:
    """Integrate the master equation separately on every pole-free window.

    At a zero of ``lambda`` every population trajectory passes through the same
    value, so the generator alone cannot carry the state across. The first
    window starts from ``rho0``. Each later window is seeded from the exact map
    where ``|lambda| |Delta|`` is largest and integrated outwards in both
    directions: errors shrink towards a pole and grow away from it, so seeding
    at the window edge would amplify them by ``lambda(t)/lambda(edge)``.
    """
    from .core_map import coefficient_series, evolve

    def rhs(t, y):
        r = lindblad_rates(params, t)
        d11, d12 = master_rhs(r, y[0], complex(y[1], y[2]))
        return [d11, d12.real, d12.imag]

    def leg(t0, t1, start, t_eval):
        y0 = np.array([start.rho11, start.rho12.real, start.rho12.imag])
        if t1 == t0:
            return y0[:, None]
        sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=t_eval)
        if not sol.success:
            raise NumericalError(f"master-equation integration failed on [{t0}, {t1}]: {sol.message}")
        return sol.y

    out = []
    for lo, hi in pole_free_windows(params, t_end):
        t_eval = np.linspace(lo, hi, points)
        if lo == 0.0:
            seed = 0
        else:
            c = coefficient_series(params, t_eval)
            seed = int(np.argmax(np.abs(1.0 - c.alpha - c.beta) * np.abs(c.delta)))
        ts = t_eval[seed]
        start = rho0 if ts == 0.0 else evolve(params, rho0, ts)
        back = leg(ts, lo, start, t_eval[seed::-1])[:, ::-1] if seed > 0 else np.empty((3, 0))
        fwd = leg(ts, hi, start, t_eval[seed:])
        y = np.concatenate([back[:, :-1], fwd], axis=1) if seed > 0 else fwd
        out.append(MasterSolution(t_eval, y[0], y[1] + 1j * y[2]))
    return out


# -- detailed balance and entropy ---------------------------------------------

def _eigen_populations(rho11, rho12):
    r = np.sqrt((2 * rho11 - 1) ** 2 + 4 * np.abs(rho12) ** 2)
    return 0.5 * (1 + r), 0.5 * (1 - r), r


def _evolved(s: CoefficientSeries, rho0: QubitState):
    lam = 1.0 - s.alpha - s.beta
    rho11 = s.beta + rho0.rho11 * lam
    rho12 = rho0.rho12 * s.delta
    return rho11, rho12


@dataclass(frozen=True)
class BalanceSeries:
    """Detailed-balance ratio in the computational and the eigen frame.

    ``undefined`` marks samples with a vanishing denominator or a rate pole.
    """

    times: np.ndarray
    d_balance: np.ndarray
    d_rotated: np.ndarray
    p_a: np.ndarray
    p_b: np.ndarray
    undefined: np.ndarray


def _rotated_ratio(g_dis, g_abs, g_deph, rho11, rho12, p_a, p_b):
    # eigenvector of the larger eigenvalue: (cos t/2, e^{-i phi} sin t/2) in (|1>, |0>)
    z = 2 * rho11 - 1
    x = 2 * np.abs(rho12)
    theta = np.arctan2(x, z)
    c2 = np.cos(theta / 2) ** 2
    s2 = np.sin(theta / 2) ** 2
    cs2 = c2 * s2
    # |<b|s-|a>|^2 = c^4, |<b|s+|a>|^2 = s^4, |<b|sz|a>|^2 = 4 c^2 s^2
    w_ba = g_dis * c2 * c2 + g_abs * s2 * s2 + 4 * g_deph * cs2
    w_ab = g_dis * s2 * s2 + g_abs * c2 * c2 + 4 * g_deph * cs2
    with np.errstate(divide="ignore", invalid="ignore"):
        return w_ba * p_a / (w_ab * p_b)


def balance_series(params: ModelParams, rho0: QubitState, times) -> BalanceSeries:
    rs = rate_series(params, times)
    rho11, rho12 = _evolved(rs.coefficients, rho0)
    p_a, p_b, _ = _eigen_populations(rho11, rho12)
    den = rs.gamma_abs * p_b
    with np.errstate(divide="ignore", invalid="ignore"):
        d = rs.gamma_dis * p_a / den
    d_rot = _rotated_ratio(rs.gamma_dis, rs.gamma_abs, rs.gamma_deph, rho11, rho12, p_a, p_b)
    undefined = rs.pole_flag | (np.abs(den) == 0) | ~np.isfinite(d)
    d = np.where(undefined, np.nan, d)
    d_rot = np.where(np.isfinite(d_rot) & ~rs.pole_flag, d_rot, np.nan)
    return BalanceSeries(rs.times, d, d_rot, p_a, p_b, undefined)


def detailed_balance(params: ModelParams, rho0: QubitState, t: float) -> float:
    """``D(t) = G_dis P_a / (G_abs P_b)`` on the exactly evolved state; NaN when undefined.

    ``P_a >= P_b`` are the eigenvalues of ``rho(t)``. The eigen-frame variant is in
    :func:`balance_series`; both agree when ``rho12 = 0`` and ``rho11 >= rho22``.
    """
    if t < 0:
        raise DomainError(f"t={t} must be >= 0")
    return float(balance_series(params, rho0, [t]).d_balance[0])


@dataclass(frozen=True)
class BalanceScan:
    """``D(t)`` on a grid with pole neighbourhoods removed.

    ``poles`` are rate poles, ``denominator_zeros`` the zeros of
    ``G_abs P_b`` where ``D`` itself diverges. ``keep`` marks samples farther
    than ``POLE_EXCLUSION`` from both.
    """

    series: BalanceSeries
    keep: np.ndarray
    poles: list
    denominator_zeros: list

    @property
    def excluded_fraction(self) -> float:
        return float(1.0 - self.keep.mean())

    def max_deviation(self, rotated: bool = False) -> float:
        d = self.series.d_rotated if rotated else self.series.d_balance
        vals = np.abs(d[self.keep] - 1.0)
        return float(np.max(vals)) if vals.size else math.nan


def balance_scan(params: ModelParams, rho0: QubitState, times) -> BalanceScan:
    times = np.asarray(times, dtype=float)
    lo, hi = float(times[0]), float(times[-1])
    series = balance_series(params, rho0, times)
    grid = scan_grid(params, lo, hi)
    rs = rate_series(params, grid)
    c = rs.coefficients
    poles = [] if params.epsilon == 0 else _poles_on_grid(params, grid, 1.0 - c.alpha - c.beta, c.delta, NEAR_POLE)

    def den(t, rs=None):
        rs = rate_series(params, t) if rs is None else rs
        rho11, rho12 = _evolved(rs.coefficients, rho0)
        return rs.gamma_abs * _eigen_populations(rho11, rho12)[1]

    g = den(grid, rs)
    idx = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    zeros = [float(z) for z in bisect_roots(den, grid[idx], grid[idx + 1])]
    zeros += [float(t) for t in grid[g == 0]]
    keep = ~series.undefined
    marks = np.sort(np.array(poles + zeros))
    if marks.size:
        # distance to the nearest mark
        pos = np.searchsorted(marks, times)
        left = np.abs(times - marks[np.clip(pos - 1, 0, marks.size - 1)])
        right = np.abs(marks[np.clip(pos, 0, marks.size - 1)] - times)
        keep &= np.minimum(left, right) > POLE_EXCLUSION
    return BalanceScan(series, keep, poles, sorted(zeros))


@dataclass(frozen=True)
class ThermoSample:
    """Entropy bookkeeping at one time.

    ``sign_mismatch`` flags samples where ``G_dis P_a`` and ``G_abs P_b`` have
    opposite signs; ``sigma`` is then the signed value ``(x - y) ln|x/y|``.
    ``undefined`` covers poles and a vanishing product.
    """

    time: float
    d_balance: float
    sigma: float
    phi: float
    entropy: float
    p_a: float
    p_b: float
    entropy_rate: float = 0.0
    flux_dis: float = 0.0
    flux_abs: float = 0.0
    sign_mismatch: bool = False
    undefined: bool = False


@dataclass(frozen=True)
class ThermoSeries:
    times: np.ndarray
    d_balance: np.ndarray
    sigma: np.ndarray
    phi: np.ndarray
    entropy: np.ndarray
    p_a: np.ndarray
    p_b: np.ndarray
    entropy_rate: np.ndarray
    flux_dis: np.ndarray
    flux_abs: np.ndarray
    sign_mismatch: np.ndarray
    undefined: np.ndarray

    def at(self, i: int) -> ThermoSample:
        return ThermoSample(*(float(getattr(self, f)[i]) for f in (
            "times", "d_balance", "sigma", "phi", "entropy", "p_a", "p_b",
            "entropy_rate", "flux_dis", "flux_abs")),
            sign_mismatch=bool(self.sign_mismatch[i]), undefined=bool(self.undefined[i]))


def entropy_production_rate(x, y):
    """``(x - y) ln(x/y)`` with the signed-argument convention; returns (value, mismatch, undefined)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mismatch = (x * y) < 0
    undefined = (x == 0) & (y == 0) | ~np.isfinite(x) | ~np.isfinite(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(x / y)
        sigma = (x - y) * np.log(ratio)
    # one side exactly zero: the logarithm diverges
    sigma = np.where(undefined, np.nan, sigma)
    return sigma, mismatch, undefined


def entropy_series(params: ModelParams, rho0: QubitState, times) -> ThermoSeries:
    rs = rate_series(params, times)
    s = rs.coefficients
    rho11, rho12 = _evolved(s, rho0)
    p_a, p_b, r = _eigen_populations(rho11, rho12)
    x = rs.gamma_dis * p_a
    y = rs.gamma_abs * p_b
    sigma, mismatch, undefined = entropy_production_rate(x, y)
    undefined = undefined | rs.pole_flag
    sigma = np.where(undefined, np.nan, sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(undefined | (y == 0), np.nan, x / y)
    # dS/dt = -dP_a/dt ln(P_a/P_b), dP_a/dt = r'/2 from the map derivatives
    z = 2 * rho11 - 1
    dz = 2 * (s.d_beta - rho0.rho11 * (s.d_alpha + s.d_beta))
    dmod2 = abs(rho0.rho12) ** 2 * 2 * (s.d_delta * np.conj(s.delta)).real
    with np.errstate(divide="ignore", invalid="ignore"):
        dr = np.where(r > 1e-14, (z * dz + 2 * dmod2) / r, 0.0)
        log_ratio = np.where(r > 1e-14, np.log(p_a / p_b), 0.0)
        ent = -np.where(p_a > 0, p_a * np.log(p_a), 0.0) - np.where(p_b > 0, p_b * np.log(p_b), 0.0)
        ds = np.where(dr == 0, 0.0, -0.5 * dr * log_ratio)
    phi = ds - sigma
    return ThermoSeries(rs.times, d, sigma, phi, ent, p_a, p_b, ds, x, y, mismatch, undefined)


def entropy_production(params: ModelParams, rho0: QubitState, t: float) -> ThermoSample:
    """Entropy production rate, entropy flux and entropy of ``rho(t)``."""
    if t < 0:
        raise DomainError(f"t={t} must be >= 0")
    return entropy_series(params, rho0, [t]).at(0)


# -- non-Markovianity --------------------------------------------------------

def predicate_intervals(predicate, t_grid, iterations: int = 55) -> list[tuple[float, float]]:
    """Maximal intervals where ``predicate`` holds, ends refined by bisection.

    ``predicate`` maps an array of times to a boolean array. Intervals touching
    the grid ends start or stop at the grid end.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        return []
    flags = np.asarray(predicate(t_grid), dtype=bool)
    cells = np.flatnonzero(flags[1:] != flags[:-1])
    lo, hi = t_grid[cells].copy(), t_grid[cells + 1].copy()
    lo_flag = flags[cells]
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        same = np.asarray(predicate(mid), dtype=bool) == lo_flag
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    edges = 0.5 * (lo + hi)
    bounds = ([float(t_grid[0])] if flags[0] else []) + [float(e) for e in edges]
    if flags[-1]:
        bounds.append(float(t_grid[-1]))
    return list(zip(bounds[::2], bounds[1::2]))


def non_markovianity_witness(params: ModelParams, t_grid, iterations: int = 60) -> list[tuple[float, float]]:
    """Maximal intervals on which ``min(G_dis, G_abs, G_deph) < 0``."""
    if params.epsilon == 0:
        return []

    def neg(t):
        r = rate_series(params, t)
        return np.minimum(np.minimum(r.gamma_dis, r.gamma_abs), r.gamma_deph) < 0

    return predicate_intervals(neg, t_grid, iterations)


def interval_measure(intervals) -> float:
    return float(sum(b - a for a, b in intervals))


def _union(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _intersection(xs, ys):
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        a, b = max(xs[i][0], ys[j][0]), min(xs[i][1], ys[j][1])
        if b > a:
            out.append((a, b))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def _difference(xs, ys):
    out = []
    for a, b in xs:
        cur = a
        for c, d in ys:
            if d <= cur or c >= b:
                continue
            if c > cur:
                out.append((cur, c))
            cur = max(cur, d)
        if cur < b:
            out.append((cur, b))
    return out


def symmetric_difference_measure(xs, ys, exclude=()) -> float:
    """Measure of ``(xs ^ ys) minus exclude`` for lists of disjoint intervals."""
    xs, ys, ex = _union(xs), _union(ys), _union(exclude)
    sym = _difference(_union(xs + ys), _intersection(xs, ys))
    return interval_measure(_difference(sym, ex))


@dataclass(frozen=True)
class SignLinkage:
    """Where entropy production is negative versus where a population rate is negative."""

    window: tuple[float, float]
    sigma_negative: list
    rate_negative: list
    excluded: list
    mismatch_measure: float

    @property
    def mismatch_fraction(self) -> float:
        return self.mismatch_measure / (self.window[1] - self.window[0])


def entropy_sign_linkage(params: ModelParams, rho0: QubitState, t_grid) -> SignLinkage:
    """Compare ``{sigma < 0}`` with ``{min(G_dis, G_abs) < 0}`` on ``t_grid``.

    Pole neighbourhoods of half-width ``POLE_EXCLUSION`` are left out of the
    symmetric difference.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    lo, hi = float(t_grid[0]), float(t_grid[-1])

    def sigma_neg(t):
        return entropy_series(params, rho0, t).sigma < 0

    def rate_neg(t):
        r = rate_series(params, t)
        return np.minimum(r.gamma_dis, r.gamma_abs) < 0

    a = predicate_intervals(sigma_neg, t_grid)
    b = predicate_intervals(rate_neg, t_grid)
    ex = [(max(p - POLE_EXCLUSION, lo), min(p + POLE_EXCLUSION, hi)) for p in find_poles(params, hi, lo)]
    return SignLinkage((lo, hi), a, b, ex, symmetric_difference_measure(a, b, ex))
