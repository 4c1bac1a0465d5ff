import math

import pytest

from centralspin.params import HBAR, K_B, Branch, DomainError, ModelParams, from_physical, temperature_from_kelvin


def test_defaults_and_replace():
    p = ModelParams()
    assert p.infinite_temperature and p.thermal_exponent == 0.0
    q = p.replace(temperature=2.0)
    assert q.thermal_exponent == pytest.approx(0.5)
    assert q.as_dict()["temperature"] == 2.0


@pytest.mark.parametrize("kwargs", [dict(n_bath=0), dict(epsilon=-1.0), dict(temperature=0.0),
                                    dict(omega=-1.0), dict(n_bath=2.5)])
def test_invalid(kwargs):
    with pytest.raises(DomainError):
        ModelParams(**kwargs)


def test_physical_units():
    t = temperature_from_kelvin(300.0)
    assert t == pytest.approx(K_B * 300.0 / HBAR / 1e6)
    p = from_physical(100, 100, 1, 100, 300, "mirrored")
    assert p.branch is Branch.MIRRORED and p.omega == 100 and p.temperature == pytest.approx(t)
    assert math.isinf(from_physical(1, 1, 1, 1, math.inf).temperature)
