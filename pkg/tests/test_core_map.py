import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspin import kernels
from centralspin.core_map import (MapCoefficients, QubitState, apply_map, coefficient_derivatives,
                                  coefficient_series, evolve, map_coefficients, partition_function,
                                  spectral_pair, thermal_weight, thermal_weights)
from centralspin.params import Branch, CPViolationError, DomainError, ModelParams

params_st = st.builds(
    ModelParams,
    omega0=st.floats(0.0, 3.0),
    omega=st.floats(0.1, 3.0),
    epsilon=st.floats(0.0, 2.0),
    n_bath=st.integers(1, 40),
    temperature=st.one_of(st.floats(0.05, 100.0), st.just(math.inf)),
)


def test_identity_at_zero():
    c = map_coefficients(ModelParams(1.0, 1.0, 0.7, 5, 1.0), 0.0)
    assert c.alpha == pytest.approx(0.0, abs=1e-15)
    assert c.beta == pytest.approx(0.0, abs=1e-15)
    assert c.delta == pytest.approx(1.0, abs=1e-15)


def test_no_coupling_keeps_populations():
    p = ModelParams(1.0, 1.0, 0.0, 4, 1.0)
    s = coefficient_series(p, np.linspace(0, 20, 50))
    assert np.all(s.alpha == 0) and np.all(s.beta == 0)
    assert np.allclose(np.abs(s.delta), 1.0, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.0, 50.0))
def test_complete_positivity(p, t):
    c = map_coefficients(p, t)
    assert -1e-12 <= c.alpha <= 1 + 1e-12
    assert -1e-12 <= c.beta <= 1 + 1e-12
    assert c.cp_margin() >= -1e-12


def test_spectral_pair_ground_level():
    p = ModelParams(1.5, 1.0, 0.5, 3)
    sp = spectral_pair(p, 0)
    assert sp.eta_prime == abs(p.detuning)
    assert sp.eta == pytest.approx(math.sqrt(p.detuning**2 + 4 * 0.25))
    with pytest.raises(DomainError):
        spectral_pair(p, 4)


def test_thermal_weights():
    p = ModelParams(1.0, 1.0, 1.0, 6, 0.5)
    w = thermal_weights(p)
    assert math.fsum(w) == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(w) < 0)
    z = partition_function(p)
    n = np.arange(7)
    assert z == pytest.approx(np.sum(np.exp(-p.thermal_exponent * (n / 12 - 0.5))))
    assert thermal_weight(p, 2) == w[2]
    hot = ModelParams(1.0, 1.0, 1.0, 6)
    assert np.allclose(thermal_weights(hot), 1 / 7)
    assert partition_function(hot) == 7


def test_derivatives_against_finite_differences():
    p = ModelParams(1.0, 1.0, 1.0, 2, 1.0)
    t, h = 1.5, 1e-5
    da, db, dd = coefficient_derivatives(p, t)
    plus, minus = map_coefficients(p, t + h), map_coefficients(p, t - h)
    assert da == pytest.approx((plus.alpha - minus.alpha) / (2 * h), abs=1e-6)
    assert db == pytest.approx((plus.beta - minus.beta) / (2 * h), abs=1e-6)
    assert abs(dd - (plus.delta - minus.delta) / (2 * h)) <= 1e-6


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")
def test_backends_agree():
    p = ModelParams(0.8, 1.0, 0.6, 50, 2.0)
    t = np.linspace(0, 40, 300)
    a = coefficient_series(p, t, derivatives=True, backend="cython")
    b = coefficient_series(p, t, derivatives=True, backend="python")
    for k in ("alpha", "beta", "delta", "d_alpha", "d_beta", "d_delta"):
        assert np.max(np.abs(getattr(a, k) - getattr(b, k))) <= 1e-13


def test_branch_changes_only_coherence():
    u = ModelParams(1.0, 1.0, 0.5, 5, 1.0)
    m = u.replace(branch=Branch.MIRRORED)
    cu, cm = map_coefficients(u, 3.0), map_coefficients(m, 3.0)
    assert cu.alpha == cm.alpha and cu.beta == cm.beta
    assert cu.delta != cm.delta


def test_apply_map_and_evolve():
    c = MapCoefficients(0.2, 0.1, 0.5 + 0.1j)
    r = apply_map(c, QubitState(0.7, 0.3))
    assert r.rho11 == pytest.approx(0.7 * 0.8 + 0.3 * 0.1)
    assert r.rho12 == pytest.approx(0.3 * (0.5 + 0.1j))
    with pytest.raises(CPViolationError):
        apply_map(MapCoefficients(0.5, 0.5, 0.9), QubitState(0.5))
    p = ModelParams(1.0, 1.0, 0.5, 3)
    assert evolve(p, QubitState(1.0), 0.0).rho11 == pytest.approx(1.0)


def test_state_validation():
    with pytest.raises(DomainError):
        QubitState(1.2)
    with pytest.raises(DomainError):
        QubitState(0.5, 0.6)
    s = QubitState.from_bloch(0.2, -0.4, 0.6)
    assert np.allclose(s.bloch(), [0.2, -0.4, 0.6])
    assert QubitState.from_matrix(s.matrix()) == s


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        map_coefficients(ModelParams(), -1.0)
