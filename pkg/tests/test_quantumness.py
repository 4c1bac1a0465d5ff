import numpy as np
import pytest

from centralspin.core_map import QubitState, map_coefficients
from centralspin.params import DomainError, ModelParams
from centralspin.quantumness import (bell_state, choi_concurrence, coherence_evolution, coherence_threshold_time,
                                     concurrence, entanglement_evolution, l1_coherence, sudden_death_time,
                                     werner_state)


def test_concurrence_reference_states():
    assert concurrence(bell_state()) == pytest.approx(1.0)
    assert concurrence(werner_state(0.5)) == pytest.approx(0.25)
    assert concurrence(werner_state(1 / 3)) == pytest.approx(0.0, abs=1e-12)
    assert concurrence(np.diag([1.0, 0, 0, 0])) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        concurrence(np.eye(4))


def test_choi_concurrence_matches_wootters():
    p = ModelParams(1.0, 1.0, 0.5, 4, 1.0)
    for t in (0.3, 1.7, 5.0):
        c = map_coefficients(p, t)
        from centralspin.channel import choi_state
        assert choi_concurrence(c) == pytest.approx(concurrence(choi_state(c)), abs=1e-10)


def test_coherence_decay():
    p = ModelParams(1.0, 1.0, 0.5, 10, 1.0)
    assert l1_coherence(QubitState(0.5, 0.5)) == 1.0
    c = coherence_evolution(p, 0.8, np.array([0.0, 2.0]))
    assert c[0] == pytest.approx(0.8)
    assert coherence_evolution(p, 0.8, 2.0) == pytest.approx(c[1])
    assert np.all(coherence_evolution(ModelParams(1, 1, 0.0, 3), 1.0, np.linspace(0, 9, 5)) == pytest.approx(1.0))


def test_entanglement_bounded_by_coherence():
    p = ModelParams(1.0, 1.0, 1.0, 3, 0.5)
    t = np.linspace(0, 20, 400)
    assert np.all(entanglement_evolution(p, 1.0, t) <= coherence_evolution(p, 1.0, t) + 1e-15)


def test_threshold_times():
    p = ModelParams(1.0, 1.0, 0.5, 10, 1.0)
    t = coherence_threshold_time(p, 0.8, 20.0, 2001)
    assert abs(map_coefficients(p, t).delta) == pytest.approx(0.8, abs=1e-9)
    assert coherence_threshold_time(ModelParams(1, 1, 0.0, 2), 0.8, 20.0) is None
    assert sudden_death_time(ModelParams(1.0, 1.0, 1.0, 5, 1.0), 30.0) is not None
