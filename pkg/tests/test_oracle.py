import numpy as np
import pytest

from centralspin.core_map import QubitState, evolve, map_coefficients
from centralspin.oracle import (assemble_map_from_blocks, integrate_blocks, joint_unitary_evolve, oracle_suite,
                                random_grid)
from centralspin.params import DomainError, ModelParams


def test_blocks_are_unitary():
    amp = integrate_blocks(ModelParams(1.0, 1.0, 1.0, 3, 1.0), 2, 10.0)
    assert amp.unitarity_defect <= 1e-8


@pytest.mark.parametrize("p", [ModelParams(1.0, 1.0, 0.5, 1, 0.1), ModelParams(0.7, 1.3, 1.0, 4),
                               ModelParams(1.0, 1.0, 0.1, 10, 10.0)])
def test_three_routes_agree(p):
    t = 7.3
    exact = map_coefficients(p, t)
    brute = assemble_map_from_blocks(p, t, 1e-12)
    assert abs(exact.alpha - brute.alpha) <= 1e-9
    assert abs(exact.beta - brute.beta) <= 1e-9
    assert abs(exact.delta - brute.delta) <= 1e-9
    rho0 = QubitState(0.7, 0.2 + 0.3j)
    a, b = evolve(p, rho0, t), joint_unitary_evolve(p, rho0, t)
    assert abs(a.rho11 - b.rho11) <= 1e-12 and abs(a.rho12 - b.rho12) <= 1e-12


def test_dense_limit():
    with pytest.raises(DomainError):
        joint_unitary_evolve(ModelParams(n_bath=100), QubitState(1.0), 1.0)


def test_suite_small_and_failing_tolerance():
    rep = oracle_suite(points=5, seed=3)
    assert rep.passed and rep.points == 5
    bad = oracle_suite(tolerance=1e-20, grid=random_grid(3, 4))
    assert not bad.passed and bad.worst_point
    grid = random_grid(4, 7)
    assert grid == random_grid(4, 7)
    assert all(p.n_bath in (1, 2, 5, 10) and 0 <= t <= 50 for p, t in grid)
