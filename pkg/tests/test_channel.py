import math

import numpy as np
import pytest

from centralspin.channel import (apply_kraus, choi_from_kraus, choi_state, cp_divisibility_integrals,
                                 kraus_closed_form, kraus_from_choi, kraus_operators)
from centralspin.core_map import MapCoefficients, QubitState, apply_map
from centralspin.params import CPViolationError, DomainError, ModelParams


def test_identity_channel():
    ks = kraus_operators(MapCoefficients.identity())
    assert ks.completeness_residual() <= 1e-15
    rho = QubitState(0.3, 0.2 + 0.1j)
    out = apply_kraus(ks, rho)
    assert out.rho11 == pytest.approx(rho.rho11) and out.rho12 == pytest.approx(rho.rho12)


def test_choi_rejects_non_cp():
    with pytest.raises(CPViolationError) as err:
        choi_state(MapCoefficients(0.5, 0.5, 0.8))
    assert err.value.min_eigenvalue < 0


def test_zero_coherence_is_well_conditioned():
    ks = kraus_operators(MapCoefficients(0.3, 0.2, 0j))
    assert ks.completeness_residual() <= 1e-14
    assert ks.x1 >= ks.x2
    assert math.isnan(ks.y1)


def test_two_kraus_routes_agree():
    c = MapCoefficients(0.25, 0.1, 0.4 * np.exp(0.7j))
    rho = QubitState(0.6, 0.2 - 0.3j)
    a = apply_kraus(kraus_closed_form(c), rho)
    b = apply_kraus(kraus_operators(c), rho)
    ref = apply_map(c, rho)
    for out in (a, b):
        assert out.rho11 == pytest.approx(ref.rho11, abs=1e-13)
        assert abs(out.rho12 - ref.rho12) <= 1e-13
    assert np.allclose(choi_from_kraus(kraus_closed_form(c)), choi_state(c), atol=1e-13)
    with pytest.raises(DomainError):
        kraus_closed_form(MapCoefficients(0.1, 0.1, 0j))


def test_generic_kraus_from_choi():
    c = MapCoefficients(0.4, 0.3, 0.2j)
    chi = choi_state(c)
    assert np.allclose(choi_from_kraus(kraus_from_choi(chi)), chi, atol=1e-14)


def test_apply_kraus_rejects_incomplete_set():
    with pytest.raises(DomainError):
        apply_kraus([np.eye(2) * 0.5], QubitState(0.5))


def test_divisibility_integrals():
    # with no coupling all rates vanish
    zero = cp_divisibility_integrals(ModelParams(1.0, 1.0, 0.0, 2), 5.0, 1e-2)
    assert zero.int_dis == 0 and zero.int_abs == 0 and zero.nonnegative
    nm = cp_divisibility_integrals(ModelParams(1.0, 1.0, 1.0, 2, 1.0), 5.0, 1e-3)
    assert nm.excluded
    with pytest.raises(DomainError):
        cp_divisibility_integrals(ModelParams(), 0.0)
