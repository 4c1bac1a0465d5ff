import json
import math

import pytest

from centralspin.config import ConfigError, parse_config, to_csv, to_json, write_table
from centralspin.params import Branch

BASIC = """
[model]
omega0 = 1
epsilon = 0.5
n_bath = 4
temperature = inf
branch = mirrored
[state]
rho11 = 0.8
rho12_re = 0.2
[time]
end = 10
steps = 11
"""


def test_parse_basic():
    cfg = parse_config(BASIC, env={})
    assert cfg.params.n_bath == 4 and math.isinf(cfg.params.temperature)
    assert cfg.params.branch is Branch.MIRRORED
    assert cfg.state.rho12 == 0.2
    assert cfg.time_grid == (0.0, 10.0, 11)
    assert cfg.fmt == "csv" and cfg.workers == 1


def test_physical_units():
    cfg = parse_config("[model]\nunits = physical\nomega0 = 100\nomega = 100\nepsilon = 1\n"
                       "n_bath = 100\ntemperature = 300\n", env={})
    assert cfg.params.omega == 100 and cfg.params.temperature == pytest.approx(3.9276e7, rel=1e-4)


def test_environment_overrides():
    cfg = parse_config(BASIC + "[output]\npath = a.csv\nworkers = 2\n",
                       env={"CENTRALSPIN_OUT": "b.csv", "CENTRALSPIN_WORKERS": "3"})
    assert cfg.out == "b.csv" and cfg.workers == 3


@pytest.mark.parametrize("text", [
    "", "[model]\nn_bath = x\n", "[model]\nunits = imperial\n", "[model]\nbranch = sideways\n",
    "[model]\n[bogus]\n", "[model]\ncolour = red\n", "[model]\n[state]\nrho11 = 2\n",
    "[model]\n[time]\nstart = 5\nend = 1\n", "[model]\n[output]\nformat = xml\n", "[model]\nepsilon = -1\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text, env={})


def test_csv_and_json_round_trip(tmp_path):
    cols = ("time", "value", "z", "flags")
    rows = [(0.1, 1 / 3, 1 + 2j, ""), (0.2, math.nan, -0.5j, "pole"), (0.3, math.inf, 0j, "")]
    csv = to_csv(cols, rows)
    lines = csv.splitlines()
    assert lines[0] == "time,value,z_re,z_im,flags"
    assert lines[1].split(",")[1] == "0.33333333333333331"
    doc = json.loads(to_json(cols, rows, {"k": 1}))
    assert doc["columns"] == ["time", "value", "z_re", "z_im", "flags"]
    assert doc["rows"][0][1] == 1 / 3 and math.isnan(doc["rows"][1][1]) and math.isinf(doc["rows"][2][1])
    path = tmp_path / "o.csv"
    assert write_table(str(path), "csv", cols, rows) == path.read_text()
