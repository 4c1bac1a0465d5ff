"""Parameter sweeps producing tabular datasets.

Rows are computed independently per axis value and may run on a process
pool; assembly always follows axis order, so worker count never changes the
output.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core_map import QubitState, coefficient_series
from .longtime import averaged_populations, information_trapping
from .params import DomainError, ModelParams
from .thermo import (NEAR_POLE, POLE_EXCLUSION, POLE_THRESHOLD, balance_series, entropy_series, near_pole_mask,
                     rate_series)

try:
    from importlib.metadata import version as _version

    VERSION = _version("artifact")
except Exception:  # pragma: no cover - running from a source tree
    VERSION = "0+unknown"

AXES = ("temperature", "epsilon", "n_bath", "time", "rho11_0")
TIME_OBSERVABLES = {
    "coherence": ("coherence",),
    "entanglement": ("concurrence",),
    "d_balance": ("d_balance", "d_rotated"),
    "sigma": ("sigma", "phi", "entropy", "entropy_rate"),
    "rates": ("gamma_dis", "gamma_abs", "gamma_deph", "delta_shift"),
}
LONGTIME_OBSERVABLES = {
    "trapping": ("trapping", "alpha_bar", "beta_bar"),
    "population_ratio": ("ratio",),
}
LONGTIME_AXES = {
    "trapping": ("temperature", "epsilon", "n_bath"),
    "population_ratio": ("rho11_0", "epsilon", "temperature", "n_bath"),
}


@dataclass(frozen=True)
class SweepSpec:
    """One observable evaluated along one parameter axis.

    ``time_grid`` is ``(t_start, t_end, steps)`` with ``steps`` points. For the
    ``time`` axis the values are the sample times themselves.
    """

    base: ModelParams
    axis: str
    values: tuple
    observable: str
    time_grid: tuple = (0.0, 50.0, 501)
    initial_state: QubitState = field(default_factory=QubitState.maximally_coherent)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.axis not in AXES:
            raise DomainError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        if not self.values:
            raise DomainError("sweep values must be non-empty")
        if self.observable in LONGTIME_OBSERVABLES:
            if self.axis not in LONGTIME_AXES[self.observable]:
                raise DomainError(f"observable {self.observable!r} does not support axis {self.axis!r}")
        elif self.observable not in TIME_OBSERVABLES:
            raise DomainError(f"unknown observable {self.observable!r}")
        if self.axis == "time":
            if self.observable in LONGTIME_OBSERVABLES:
                raise DomainError("long-time observables have no time axis")
            v = np.asarray(self.values, dtype=float)
            if np.any(np.diff(v) <= 0) or v[0] < 0:
                raise DomainError("time values must be >= 0 and strictly increasing")
        else:
            t0, t1, steps = self.time_grid
            if int(steps) < 1 or t0 < 0 or (int(steps) > 1 and not t1 > t0):
                raise DomainError("time grid must be non-empty and strictly increasing")
        for v in self.values:
            self.point(v)

    @property
    def columns(self) -> tuple:
        obs = TIME_OBSERVABLES.get(self.observable) or LONGTIME_OBSERVABLES[self.observable]
        return (self.axis if self.axis != "time" else "axis_time", "time") + obs + ("flags",)

    def times(self) -> np.ndarray:
        if self.axis == "time":
            return np.asarray(self.values, dtype=float)
        t0, t1, steps = self.time_grid
        return np.linspace(float(t0), float(t1), int(steps))

    def point(self, value) -> tuple[ModelParams, QubitState]:
        """Model parameters and initial state at one axis value."""
        p, rho = self.base, self.initial_state
        if self.axis == "temperature":
            p = p.replace(temperature=float(value))
        elif self.axis == "epsilon":
            p = p.replace(epsilon=float(value))
        elif self.axis == "n_bath":
            if int(value) != value:
                raise DomainError(f"n_bath value {value!r} is not an integer")
            p = p.replace(n_bath=int(value))
        elif self.axis == "rho11_0":
            rho = QubitState(float(value))
        return p, rho


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: list
    metadata: dict

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def _flags(*pairs) -> list[str]:
    return [name for name, on in pairs if on]


def _time_rows(spec: SweepSpec, value) -> list[tuple]:
    p, rho = spec.point(value)
    times = spec.times()
    axis_val = value
    obs = spec.observable
    rows = []
    if obs in ("coherence", "entanglement"):
        s = coefficient_series(p, times)
        if obs == "coherence":
            cols = [2 * abs(rho.rho12) * np.abs(s.delta)]
        else:
            cols = [np.maximum(0.0, np.abs(s.delta) - np.sqrt(np.clip(s.alpha * s.beta, 0.0, None)))]
        flags = [[] for _ in times]
    elif obs == "rates":
        r = rate_series(p, times)
        cols = [r.gamma_dis, r.gamma_abs, r.gamma_deph, r.delta_shift]
        flags = [_flags(("pole", f)) for f in r.pole_flag | near_pole_mask(p, times)]
    elif obs == "d_balance":
        b = balance_series(p, rho, times)
        cols = [b.d_balance, b.d_rotated]
        flags = [_flags(("undefined", u)) for u in b.undefined]
    else:
        e = entropy_series(p, rho, times)
        cols = [e.sigma, e.phi, e.entropy, e.entropy_rate]
        flags = [_flags(("undefined", u), ("sign_mismatch", m)) for u, m in zip(e.undefined, e.sign_mismatch)]
    for i, t in enumerate(times):
        vals = tuple(float(c[i]) for c in cols)
        f = flags[i]
        if not all(math.isfinite(v) for v in vals) and not f:
            f = ["nonfinite"]
        rows.append((axis_val if spec.axis != "time" else float(t), float(t)) + vals + ("|".join(f),))
    return rows


def _longtime_rows(spec: SweepSpec, value) -> list[tuple]:
    p, rho = spec.point(value)
    avg = averaged_populations(p)
    if spec.observable == "trapping":
        vals = (information_trapping(p), avg.alpha_bar, avg.beta_bar)
        flags = []
    else:
        r11 = rho.rho11 * (1 - avg.alpha_bar) + rho.rho22 * avg.beta_bar
        r22 = 1 - r11
        vals = (r11 / r22 if r22 > 0 else math.inf,)
        flags = _flags(("rho22_zero", r22 <= 0))
    return [(value, math.inf) + tuple(float(v) for v in vals) + ("|".join(["longtime"] + flags),)]


def _rows_for(args):
    spec, value = args
    if spec.observable in LONGTIME_OBSERVABLES:
        return _longtime_rows(spec, value)
    return _time_rows(spec, value)


def _metadata(spec: SweepSpec, workers: int | None) -> dict:
    return {
        "version": VERSION,
        "backend": kernels.BACKEND,
        "label": spec.label,
        "base": spec.base.as_dict(),
        "axis": spec.axis,
        "values": list(spec.values),
        "observable": spec.observable,
        "time_grid": list(spec.time_grid) if spec.axis != "time" else None,
        "initial_state": {"rho11": spec.initial_state.rho11,
                          "rho12_re": spec.initial_state.rho12.real,
                          "rho12_im": spec.initial_state.rho12.imag},
        "tolerances": {"pole_threshold": POLE_THRESHOLD, "pole_exclusion": POLE_EXCLUSION,
                       "near_pole": NEAR_POLE},
    }


def _map(fn, tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate ``spec``; rows ordered by (axis index, time index)."""
    if spec.axis == "time":
        chunks = [_rows_for((spec, None))]
    else:
        chunks = _map(_rows_for, [(spec, v) for v in spec.values], workers)
    rows = [r for chunk in chunks for r in chunk]
    return SweepResult(spec.columns, rows, _metadata(spec, workers))


def population_ratio_longtime(base: ModelParams, axis: str, values, n_family=(10, 100, 1000),
                              rho11_0: float = 0.5, workers: int | None = None) -> SweepResult:
    """``rho11_bar / rho22_bar`` along ``rho11_0`` or ``epsilon`` for each bath size in ``n_family``."""
    if axis not in ("rho11_0", "epsilon"):
        raise DomainError("population ratio sweeps run over rho11_0 or epsilon")
    rows = []
    meta = None
    for n in n_family:
        spec = SweepSpec(base.replace(n_bath=int(n)), axis, tuple(values), "population_ratio",
                         initial_state=QubitState(rho11_0))
        res = run_sweep(spec, workers)
        meta = res.metadata
        for r in res.rows:
            rows.append((r[0], int(n), r[2], r[3]))
    meta = dict(meta, n_family=[int(n) for n in n_family], rho11_0=rho11_0)
    meta["base"] = dict(meta["base"], n_bath=None)
    return SweepResult((axis, "n_bath", "ratio", "flags"), rows, meta)


# Figure parameter sets were not published; these are reconstructions.
_BASE = ModelParams(omega0=1.0, omega=1.0, epsilon=0.1, n_bath=100)
PRESETS = {
    "coherence_vs_temperature": SweepSpec(_BASE, "temperature", (0.01, 1.0, 100.0), "coherence",
                                          label="reconstruction: coherence vs t across T"),
    "entanglement_vs_temperature": SweepSpec(_BASE, "temperature", (0.01, 1.0, 100.0), "entanglement",
                                             label="reconstruction: entanglement vs t across T"),
    "coherence_vs_epsilon": SweepSpec(_BASE.replace(temperature=1.0), "epsilon", (0.01, 0.1, 1.0), "coherence",
                                      label="reconstruction: coherence vs t across epsilon"),
    "coherence_vs_n": SweepSpec(_BASE.replace(temperature=1.0), "n_bath", (10, 100, 1000), "coherence",
                                label="reconstruction: coherence vs t across N"),
    "d_balance_vs_temperature": SweepSpec(_BASE.replace(epsilon=1.0, n_bath=10), "temperature", (0.01, 1.0, 100.0),
                                          "d_balance", initial_state=QubitState(0.5),
                                          label="reconstruction: D(t) across T"),
    "sigma_vs_temperature": SweepSpec(ModelParams(1.0, 1.0, 1.0, 2), "temperature", (0.01, 1.0, 100.0), "sigma",
                                      initial_state=QubitState(0.8, 0.2),
                                      label="reconstruction: entropy production across T"),
    "trapping_vs_temperature": SweepSpec(_BASE.replace(epsilon=0.5), "temperature", (0.01, 0.1, 1.0, 10.0, 100.0),
                                         "trapping", label="reconstruction: trapping vs T"),
    "trapping_vs_epsilon": SweepSpec(_BASE.replace(temperature=1.0), "epsilon", (0.01, 0.1, 0.5, 1.0, 2.0),
                                     "trapping", label="reconstruction: trapping vs epsilon"),
}
