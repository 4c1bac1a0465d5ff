import json
import subprocess
import sys

import pytest

from centralspin.cli import main

BASIC = """
[model]
omega0 = 1
omega = 1
epsilon = 1
n_bath = 2
temperature = 1
[state]
rho11 = 0.8
rho12_re = 0.2
[time]
end = 5
steps = 51
"""


def run(tmp_path, command, text, *extra):
    cfg = tmp_path / "run.ini"
    cfg.write_text(text)
    out = tmp_path / f"{command}.out"
    code = main([command, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


@pytest.mark.parametrize("command", ["evolve", "rates", "thermo", "average", "trapping"])
def test_subcommands_succeed(tmp_path, command):
    code, out = run(tmp_path, command, BASIC)
    assert code == 0
    header = out.read_text().splitlines()[0]
    assert header.endswith("flags")


def test_rates_flag_poles_without_failing(tmp_path):
    code, out = run(tmp_path, "rates", BASIC.replace("steps = 51", "steps = 5001"))
    assert code == 0
    assert any(line.endswith(",pole") for line in out.read_text().splitlines())


def test_uncoupled_evolve(tmp_path):
    code, out = run(tmp_path, "evolve", BASIC.replace("epsilon = 1", "epsilon = 0").replace("rho12_re = 0.2", "rho12_re = 0.4"))
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert code == 0
    assert {r[1] for r in rows} == {"0.80000000000000004"}
    assert all(abs(float(r[4]) - 0.8) < 1e-12 for r in rows)


def test_uncoupled_thermo_is_undefined(tmp_path):
    code, out = run(tmp_path, "thermo", BASIC.replace("epsilon = 1", "epsilon = 0"))
    assert code == 0
    assert all(line.endswith("undefined") for line in out.read_text().splitlines()[1:])


def test_config_error_writes_nothing(tmp_path):
    code, out = run(tmp_path, "evolve", "[model]\nn_bath = two\n")
    assert code == 2 and not out.exists()
    assert main(["evolve", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["unknown", "--config", "x"]) == 2


def test_json_round_trip_and_determinism(tmp_path):
    code, out = run(tmp_path, "evolve", BASIC, "--format", "json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][:4] == ["time", "rho11", "rho12_re", "rho12_im"]
    from centralspin.core_map import QubitState, evolve
    from centralspin.params import ModelParams
    ref = evolve(ModelParams(1, 1, 1, 2, 1.0), QubitState(0.8, 0.2), doc["rows"][7][0])
    assert doc["rows"][7][1] == ref.rho11
    first = out.read_bytes()
    run(tmp_path, "evolve", BASIC, "--format", "json")
    assert out.read_bytes() == first


def test_resonance(tmp_path):
    text = "[model]\nn_bath = 100\n[resonance]\neps_min = 0.1\neps_max = 0.2\ncount = 200\n"
    code, out = run(tmp_path, "resonance", text)
    lines = out.read_text().splitlines()
    assert code == 0 and len(lines) > 1 and lines[1].startswith("minus,")
    code, out = run(tmp_path, "resonance", text.replace("eps_min = 0.1\neps_max = 0.2", "eps_min = 5\neps_max = 6"))
    assert code == 0 and len(out.read_text().splitlines()) == 1
    code, out = run(tmp_path, "resonance", "[model]\nomega0 = 0.1\nn_bath = 5\n[resonance]\neps_min = 0.05\n"
                                         "eps_max = 3\ncount = 500\n")
    assert any(line.startswith("plus,") for line in out.read_text().splitlines())


def test_sweep_and_workers(tmp_path):
    text = "[model]\nepsilon = 0.5\nn_bath = 10\n[sweep]\naxis = temperature\nvalues = 0.1, 1, 10\nobservable = trapping\n"
    code, out = run(tmp_path, "sweep", text, "--workers", "2")
    assert code == 0 and len(out.read_text().splitlines()) == 4
    assert run(tmp_path, "sweep", "[model]\n")[0] == 2
    assert run(tmp_path, "sweep", text.replace("trapping", "bogus"))[0] == 2


def test_validate(tmp_path, capsys):
    text = "[model]\nn_bath = 1\n[validate]\npoints = 4\n"
    code, out = run(tmp_path, "validate", text)
    assert code == 0 and "PASS" in capsys.readouterr().out
    code, out = run(tmp_path, "validate", text + "tolerance = 1e-20\n")
    assert code == 4 and "FAIL" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(BASIC)
    res = subprocess.run([sys.executable, "-m", "centralspin", "average", "--config", str(cfg)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("alpha_bar,")
