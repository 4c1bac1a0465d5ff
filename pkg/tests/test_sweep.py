import math

import numpy as np
import pytest

from centralspin.params import DomainError, ModelParams
from centralspin.sweep import PRESETS, SweepSpec, population_ratio_longtime, run_sweep

BASE = ModelParams(1.0, 1.0, 0.5, 10)


def test_time_sweep_layout():
    spec = SweepSpec(BASE, "temperature", (0.1, 1.0), "coherence", time_grid=(0, 5, 6))
    res = run_sweep(spec)
    assert res.columns == ("temperature", "time", "coherence", "flags")
    assert len(res.rows) == 12
    assert res.rows[0][:3] == (0.1, 0.0, 1.0)
    assert res.metadata["base"]["n_bath"] == 10


@pytest.mark.parametrize("obs", ["rates", "d_balance", "sigma", "entanglement"])
def test_observables(obs):
    res = run_sweep(SweepSpec(BASE, "epsilon", (0.5,), obs, time_grid=(0, 2, 5)))
    assert len(res.rows) == 5


def test_workers_do_not_change_output():
    spec = SweepSpec(BASE, "n_bath", (2, 5, 10), "rates", time_grid=(0, 5, 11))
    assert run_sweep(spec, workers=2).rows == run_sweep(spec).rows


def test_time_axis_and_longtime():
    res = run_sweep(SweepSpec(BASE, "time", (0.0, 1.0, 2.0), "coherence"))
    assert list(res.column("time")) == [0.0, 1.0, 2.0]
    trap = run_sweep(PRESETS["trapping_vs_temperature"])
    vals = trap.column("trapping")
    assert np.all(np.diff(vals) < 0)
    assert all(math.isinf(r[1]) for r in trap.rows)


def test_population_ratio_family():
    res = population_ratio_longtime(BASE, "rho11_0", (0.2, 0.8))
    assert res.columns == ("rho11_0", "n_bath", "ratio", "flags")
    assert len(res.rows) == 6
    # larger baths pull the ratio towards 1
    r = {(row[0], row[1]): row[2] for row in res.rows}
    assert abs(r[0.8, 1000] - 1) < abs(r[0.8, 10] - 1)


@pytest.mark.parametrize("kwargs", [dict(axis="bogus"), dict(values=()), dict(observable="nope"),
                                    dict(axis="time", values=(1.0, 0.5)), dict(axis="n_bath", values=(2.5,)),
                                    dict(observable="trapping", axis="rho11_0")])
def test_invalid_specs(kwargs):
    args = dict(base=BASE, axis="temperature", values=(1.0,), observable="coherence")
    args.update(kwargs)
    with pytest.raises(DomainError):
        SweepSpec(**args)
