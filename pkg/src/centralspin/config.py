"""Run configuration: INI parsing, unit handling and table output.

Grammar (``configparser`` INI, keys case-insensitive)::

    [model]
    units = natural | physical      ; physical: MHz frequencies, Kelvin
    omega0 = 1.0
    omega = 1.0
    epsilon = 1.0
    n_bath = 10
    temperature = inf               ; or a number
    branch = unitary | mirrored

    [state]        rho11, rho12_re, rho12_im
    [time]         start, end, steps
    [tolerances]   ode, oracle, average
    [sweep]        axis, values (comma list), observable
    [resonance]    eps_min, eps_max, count
    [validate]     points, seed, tolerance
    [output]       path, format (csv | json), workers

Only ``CENTRALSPIN_OUT`` and ``CENTRALSPIN_WORKERS`` are read from the
environment; command-line flags take precedence over both.
"""
from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, field

from .core_map import QubitState
from .params import Branch, DomainError, ModelParams, from_physical

FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    units: str = "natural"
    state: QubitState = field(default_factory=QubitState.maximally_coherent)
    time_grid: tuple = (0.0, 50.0, 501)
    tolerances: dict = field(default_factory=lambda: {"ode": 1e-8, "oracle": 1e-10, "average": 1e-3})
    sweep: dict = field(default_factory=dict)
    resonance: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1


def _float(section, key, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a number") from exc


def _int(section, key, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not an integer") from exc


_KNOWN = {
    "model": {"units", "omega0", "omega", "epsilon", "n_bath", "temperature", "branch"},
    "state": {"rho11", "rho12_re", "rho12_im"},
    "time": {"start", "end", "steps"},
    "tolerances": {"ode", "oracle", "average"},
    "sweep": {"axis", "values", "observable"},
    "resonance": {"eps_min", "eps_max", "count"},
    "validate": {"points", "seed", "tolerance"},
    "output": {"path", "format", "workers"},
}


def parse_config(text: str, env: dict | None = None) -> RunConfig:
    """Parse INI ``text`` into a :class:`RunConfig`; raises :class:`ConfigError`."""
    env = os.environ if env is None else env
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for name in cp.sections():
        if name not in _KNOWN:
            raise ConfigError(f"unknown section [{name}]")
        extra = set(cp[name]) - _KNOWN[name]
        if extra:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")
    if "model" not in cp:
        raise ConfigError("missing [model] section")
    m = cp["model"]
    units = m.get("units", "natural").strip().lower()
    if units not in ("natural", "physical"):
        raise ConfigError(f"units must be natural or physical, got {units!r}")
    try:
        branch = Branch(m.get("branch", "unitary").strip().lower())
    except ValueError as exc:
        raise ConfigError(f"unknown branch {m.get('branch')!r}") from exc
    try:
        values = dict(omega0=_float(m, "omega0", 1.0), omega=_float(m, "omega", 1.0),
                      epsilon=_float(m, "epsilon", 1.0), n_bath=_int(m, "n_bath", 1),
                      temperature=_float(m, "temperature", math.inf))
        if units == "physical":
            params = from_physical(values["omega0"], values["omega"], values["epsilon"],
                                   values["n_bath"], values["temperature"], branch)
        else:
            params = ModelParams(branch=branch, **values)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    state = QubitState.maximally_coherent()
    if "state" in cp:
        s = cp["state"]
        try:
            state = QubitState(_float(s, "rho11", 0.5),
                               complex(_float(s, "rho12_re", 0.0), _float(s, "rho12_im", 0.0)))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    grid = (0.0, 50.0, 501)
    if "time" in cp:
        t = cp["time"]
        grid = (_float(t, "start", 0.0), _float(t, "end", 50.0), _int(t, "steps", 501))
        if grid[2] < 1 or grid[0] < 0 or (grid[2] > 1 and not grid[1] > grid[0]):
            raise ConfigError("[time] needs 0 <= start < end and steps >= 1")

    tol = {"ode": 1e-8, "oracle": 1e-10, "average": 1e-3}
    if "tolerances" in cp:
        for k in tol:
            tol[k] = _float(cp["tolerances"], k, tol[k])
        if any(v <= 0 for v in tol.values()):
            raise ConfigError("tolerances must be > 0")

    sweep = {}
    if "sweep" in cp:
        s = cp["sweep"]
        try:
            vals = tuple(float(v) for v in s.get("values", "").split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError("[sweep] values must be a comma-separated list of numbers") from exc
        sweep = {"axis": s.get("axis", "temperature").strip(), "values": vals,
                 "observable": s.get("observable", "coherence").strip()}

    resonance = {}
    if "resonance" in cp:
        r = cp["resonance"]
        resonance = {"eps_min": _float(r, "eps_min", 0.1), "eps_max": _float(r, "eps_max", 2.0),
                     "count": _int(r, "count", 1000)}

    validate = {}
    if "validate" in cp:
        v = cp["validate"]
        validate = {"points": _int(v, "points", 200), "seed": _int(v, "seed", 0),
                    "tolerance": _float(v, "tolerance", 1e-8)}

    out, fmt, workers = None, "csv", 1
    if "output" in cp:
        o = cp["output"]
        out = o.get("path")
        fmt = o.get("format", "csv").strip().lower()
        workers = _int(o, "workers", 1)
    if env.get("CENTRALSPIN_OUT"):
        out = env["CENTRALSPIN_OUT"]
    if env.get("CENTRALSPIN_WORKERS"):
        try:
            workers = int(env["CENTRALSPIN_WORKERS"])
        except ValueError as exc:
            raise ConfigError("CENTRALSPIN_WORKERS must be an integer") from exc
    if fmt not in FORMATS:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return RunConfig(params, units, state, grid, tol, sweep, resonance, validate, out, fmt, workers)


def load_config(path: str, env: dict | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text, env)


# -- output ------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def expand_complex(columns, rows):
    """Split complex columns into ``_re``/``_im`` pairs."""
    cplx = [any(isinstance(r[i], complex) for r in rows) for i in range(len(columns))]
    cols = []
    for name, c in zip(columns, cplx):
        cols += [f"{name}_re", f"{name}_im"] if c else [name]
    out = []
    for r in rows:
        row = []
        for v, c in zip(r, cplx):
            if c:
                v = complex(v)
                row += [v.real, v.imag]
            else:
                row.append(v)
        out.append(tuple(row))
    return tuple(cols), out


def to_csv(columns, rows) -> str:
    columns, rows = expand_complex(columns, rows)
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(_cell(v) for v in r))
    return "\n".join(lines) + "\n"


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def to_json(columns, rows, metadata=None) -> str:
    """JSON table; non-finite floats use the ``NaN``/``Infinity`` extension of :mod:`json`."""
    columns, rows = expand_complex(columns, rows)
    doc = {"columns": list(columns), "rows": [list(r) for r in rows], "metadata": _json_safe(metadata or {})}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_table(path, fmt, columns, rows, metadata=None) -> str:
    text = to_json(columns, rows, metadata) if fmt == "json" else to_csv(columns, rows)
    if path:
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    return text
