"""Command-line front end.

Usage::

    centralspin SUBCOMMAND --config PATH [--out PATH] [--format csv|json] [--workers INT]

Subcommands and their columns (complex columns are split into ``_re``/``_im``):

``evolve``      time, rho11, rho12, coherence, concurrence, flags
``rates``       time, gamma_dis, gamma_abs, gamma_deph, delta_shift, flags
``thermo``      time, d_balance, d_rotated, sigma, phi, entropy, entropy_rate, flags
``resonance``   branch, epsilon, level, mismatch, delta_resonant, simplified, flags
``average``     alpha_bar, beta_bar, delta_bar, horizon, rho11_bar, rho12_bar, flags
``trapping``    trapping, trapping_numeric, ratio, delta_bar, flags
``validate``    check, deviation, tolerance, passed
``sweep``       axis value, time, observable columns, flags

Exit codes: 0 success, 2 configuration error (nothing written), 3 numerical
pathology (rows written with flags), 4 validation failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import kernels
from .config import FORMATS, ConfigError, RunConfig, load_config, write_table
from .core_map import coefficient_series
from .longtime import (averaged_coefficients, resonance_scan, resonant_delta, simplified_candidates,
                       time_averaged_state, trapping_numeric)
from .oracle import oracle_suite, random_grid
from .params import CPViolationError, DomainError, NumericalError
from .sweep import VERSION, SweepSpec, run_sweep
from .thermo import balance_series, entropy_series, near_pole_mask, rate_series

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4
SUBCOMMANDS = ("evolve", "rates", "thermo", "resonance", "average", "trapping", "validate", "sweep")


class Table:
    def __init__(self, columns, rows, metadata=None, pathology=False):
        self.columns = tuple(columns)
        self.rows = rows
        self.metadata = metadata or {}
        self.pathology = pathology


def _times(cfg: RunConfig) -> np.ndarray:
    t0, t1, steps = cfg.time_grid
    return np.linspace(t0, t1, steps)


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "version": VERSION, "backend": kernels.BACKEND, "units": cfg.units,
            "params": cfg.params.as_dict(), "time_grid": list(cfg.time_grid),
            "initial_state": [cfg.state.rho11, cfg.state.rho12], "tolerances": dict(cfg.tolerances)}


def _finish(columns, rows, meta) -> Table:
    """Flag rows with non-finite values that are not already explained by a flag."""
    bad = False
    out = []
    for r in rows:
        *vals, flags = r
        nums = [v for v in vals if isinstance(v, (float, complex))]
        if not all(np.isfinite(v) for v in nums) and not flags:
            flags = "nonfinite"
            bad = True
        out.append(tuple(vals) + (flags,))
    return Table(columns, out, meta, bad)


def cmd_evolve(cfg: RunConfig) -> Table:
    t = _times(cfg)
    s = coefficient_series(cfg.params, t)
    rho0 = cfg.state
    rows, bad = [], False
    for i, ti in enumerate(t):
        a, b, d = float(s.alpha[i]), float(s.beta[i]), complex(s.delta[i])
        rho11 = rho0.rho11 * (1 - a) + rho0.rho22 * b
        rho12 = rho0.rho12 * d
        margin = (1 - a) * (1 - b) - abs(d) ** 2
        flags = ""
        if margin < -1e-10 or not -1e-10 <= a <= 1 + 1e-10 or not -1e-10 <= b <= 1 + 1e-10:
            flags, bad = "cp_violation", True
        conc = max(0.0, abs(d) - math.sqrt(max(a * b, 0.0)))
        rows.append((float(ti), rho11, rho12, 2 * abs(rho12), conc, flags))
    table = _finish(("time", "rho11", "rho12", "coherence", "concurrence", "flags"), rows,
                    _meta(cfg, "evolve"))
    table.pathology |= bad
    return table


def cmd_rates(cfg: RunConfig) -> Table:
    t = _times(cfg)
    r = rate_series(cfg.params, t)
    near = near_pole_mask(cfg.params, t) | r.pole_flag
    rows = [(float(t[i]), float(r.gamma_dis[i]), float(r.gamma_abs[i]), float(r.gamma_deph[i]),
             float(r.delta_shift[i]), "pole" if near[i] else "") for i in range(t.size)]
    return _finish(("time", "gamma_dis", "gamma_abs", "gamma_deph", "delta_shift", "flags"), rows,
                   _meta(cfg, "rates"))


def cmd_thermo(cfg: RunConfig) -> Table:
    t = _times(cfg)
    e = entropy_series(cfg.params, cfg.state, t)
    b = balance_series(cfg.params, cfg.state, t)
    near = near_pole_mask(cfg.params, t)
    rows = []
    for i in range(t.size):
        flags = [n for n, on in (("pole", near[i]), ("undefined", e.undefined[i] or b.undefined[i]),
                                 ("sign_mismatch", e.sign_mismatch[i])) if on]
        rows.append((float(t[i]), float(b.d_balance[i]), float(b.d_rotated[i]), float(e.sigma[i]),
                     float(e.phi[i]), float(e.entropy[i]), float(e.entropy_rate[i]), "|".join(flags)))
    return _finish(("time", "d_balance", "d_rotated", "sigma", "phi", "entropy", "entropy_rate", "flags"),
                   rows, _meta(cfg, "thermo"))


def cmd_resonance(cfg: RunConfig, workers: int) -> Table:
    r = cfg.resonance or {}
    lo, hi, count = r.get("eps_min", 0.1), r.get("eps_max", 2.0), r.get("count", 1000)
    p = cfg.params
    simple = simplified_candidates(p.n_bath, (lo, hi)) if p.omega == p.omega0 == 1.0 else []
    rows = []
    for branch in ("minus", "plus"):
        for rep in resonance_scan(p, (lo, hi), count, workers=workers, branch=branch):
            eps = rep.epsilon_candidates[0]
            d = resonant_delta(p.replace(epsilon=eps))
            near = min(simple, key=lambda x: abs(x - eps)) if simple else math.nan
            for level, mism in zip(rep.integer_levels, rep.mismatch):
                rows.append((branch, eps, level, mism, d, near, ""))
    meta = dict(_meta(cfg, "resonance"), eps_range=[lo, hi], count=count,
                plus_branch_possible=not (p.omega0 > 0 and p.n_bath > p.omega / p.omega0))
    return _finish(("branch", "epsilon", "level", "mismatch", "delta_resonant", "simplified", "flags"),
                   rows, meta)


def cmd_average(cfg: RunConfig) -> Table:
    avg = averaged_coefficients(cfg.params, cfg.tolerances["average"])
    rho = time_averaged_state(cfg.params, cfg.state, avg)
    flags = "" if avg.converged else "not_converged"
    row = (avg.alpha_bar, avg.beta_bar, complex(avg.delta_bar), float(avg.horizon), rho.rho11, rho.rho12, flags)
    table = _finish(("alpha_bar", "beta_bar", "delta_bar", "horizon", "rho11_bar", "rho12_bar", "flags"),
                    [row], _meta(cfg, "average"))
    table.pathology |= not avg.converged
    return table


def cmd_trapping(cfg: RunConfig) -> Table:
    num = trapping_numeric(cfg.params)
    row = (num.closed_form, num.trace_distance, num.ratio, complex(num.delta_bar), "")
    return _finish(("trapping", "trapping_numeric", "ratio", "delta_bar", "flags"), [row],
                   _meta(cfg, "trapping"))


def cmd_validate(cfg: RunConfig) -> Table:
    v = cfg.validate or {}
    points, seed, tol = v.get("points", 200), v.get("seed", 0), v.get("tolerance", 1e-8)
    grid = random_grid(points, seed)
    # the configured model at a few times of its own grid
    for t in np.linspace(*cfg.time_grid[:2], 5):
        grid.append((cfg.params, float(t)))
    rep = oracle_suite(seed=seed, tolerance=tol, ode_tol=min(cfg.tolerances["oracle"], 1e-12), grid=grid)
    rows = [("block_ode", rep.block_deviation, tol, rep.block_deviation <= tol),
            ("joint_unitary", rep.joint_deviation, tol, rep.joint_deviation <= tol)]
    status = "PASS" if rep.passed else "FAIL"
    print(f"validate: {status} over {rep.points} points (seed {seed}, tolerance {tol:g})")
    for name, dev, _, ok in rows:
        print(f"  {name:14s} max deviation {dev:.3e}  {'pass' if ok else 'FAIL'}")
    if not rep.passed:
        print(f"  worst point: {rep.worst_point}")
    table = Table(("check", "deviation", "tolerance", "passed"), rows,
                  dict(_meta(cfg, "validate"), points=rep.points, seed=seed, worst_point=rep.worst_point))
    table.failed = not rep.passed
    return table


def cmd_sweep(cfg: RunConfig, workers: int) -> Table:
    s = cfg.sweep
    if not s:
        raise ConfigError("sweep needs a [sweep] section")
    try:
        spec = SweepSpec(cfg.params, s["axis"], s["values"], s["observable"], cfg.time_grid, cfg.state)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    res = run_sweep(spec, workers)
    table = _finish(res.columns, res.rows, dict(res.metadata, command="sweep", units=cfg.units))
    return table


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="centralspin", description="Central qubit in a finite spin bath.")
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, metavar="PATH")
    ap.add_argument("--out", metavar="PATH")
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--workers", type=int, metavar="INT")
    return ap


def _run(cfg: RunConfig, command: str, workers: int) -> Table:
    if command == "resonance":
        return cmd_resonance(cfg, workers)
    if command == "sweep":
        return cmd_sweep(cfg, workers)
    return {"evolve": cmd_evolve, "rates": cmd_rates, "thermo": cmd_thermo, "average": cmd_average,
            "trapping": cmd_trapping, "validate": cmd_validate}[command](cfg)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        out = args.out or cfg.out
        fmt = args.format or cfg.fmt
        workers = args.workers if args.workers is not None else cfg.workers
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        if out and not os.path.isdir(os.path.dirname(os.path.abspath(out))):
            raise ConfigError(f"output directory for {out!r} does not exist")
        table = _run(cfg, args.command, workers)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CPViolationError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = write_table(out, fmt, table.columns, table.rows, table.metadata)
    if not out and args.command != "validate":
        sys.stdout.write(text)
    if getattr(table, "failed", False):
        return EXIT_VALIDATION
    if table.pathology:
        print("numerical pathology: see flags column", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
