"""Acceptance criteria of the build, one test per criterion.

Each ``check_*`` function returns ``(passed, detail)``; the tests assert on it
and a per-criterion PASS/FAIL line is printed in the pytest terminal summary.
``python3 tests/test_acceptance.py`` prints the same lines without pytest.
"""
import math
import time

import numpy as np
import pytest

from centralspin.channel import apply_kraus, choi_from_kraus, kraus_operators
from centralspin.core_map import MapCoefficients, QubitState, apply_map, evolve
from centralspin.longtime import (averaged_coefficients, frequency_mismatch, information_trapping,
                                  resonance_scan, resonant_delta, time_averaged_state, tone_expansion)
from centralspin.oracle import oracle_suite
from centralspin.params import Branch, ModelParams, from_physical
from centralspin.quantumness import coherence_evolution, coherence_threshold_time
from centralspin.thermo import balance_scan, entropy_sign_linkage, integrate_windows

pytestmark = pytest.mark.acceptance

# Resonance regression constants, fixed from the first verified run.
C7_EPSILON = 0.10118874865621491
C7_LEVEL = 30
C7_HORIZON = 1e7
C7_HIT = 0.0012956893837989072
C7_BASELINES = (6.5174274477695334e-06, 1.564089793391155e-05)  # eps * 0.99, eps * 1.01


def check_c1():
    t0 = time.perf_counter()
    rep = oracle_suite(points=200, seed=0, tolerance=1e-8)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 120
    return ok, (f"block max dev {rep.block_deviation:.2e}, joint max dev {rep.joint_deviation:.2e} "
                f"over {rep.points} points in {elapsed:.0f} s")


C2_SETS = [
    ModelParams(1.0, 1.0, 1.0, 2, 1.0),
    ModelParams(1.0, 1.0, 0.5, 1, 0.1),
    ModelParams(1.0, 1.0, 0.1, 5, 10.0),
    ModelParams(1.0, 1.0, 1.0, 10, math.inf),
    ModelParams(1.0, 1.0, 0.5, 10, 1.0),
    ModelParams(2.0, 1.0, 0.3, 3, 0.5),
    ModelParams(0.5, 1.0, 0.7, 4, 2.0),
    ModelParams(1.0, 1.0, 0.2, 20, 1.0),
    ModelParams(1.0, 1.0, 1.0, 2, 1.0, Branch.MIRRORED),
    ModelParams(1.0, 1.5, 0.4, 6, 0.3),
]
C2_STATES = [QubitState.excited(), QubitState.ground(), QubitState.maximally_coherent(),
             QubitState(0.8, 0.2), QubitState(0.3, 0.1 - 0.3j)]


def check_c2(t_end=10.0):
    t0 = time.perf_counter()
    worst = 0.0
    for p in C2_SETS:
        for rho0 in C2_STATES:
            for sol in integrate_windows(p, rho0, t_end, tol=1e-10):
                for t, r11, r12 in zip(sol.times, sol.rho11, sol.rho12):
                    ex = evolve(p, rho0, t)
                    worst = max(worst, abs(ex.rho11 - r11), abs(ex.rho12 - r12))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-6 and elapsed < 60, f"max deviation {worst:.2e} in {elapsed:.0f} s"


def random_cp_triples(count, seed=1):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b = rng.uniform(0, 1, 2)
        r = math.sqrt((1 - a) * (1 - b)) * rng.uniform(0, 1)
        out.append(MapCoefficients(float(a), float(b), complex(r * np.exp(1j * rng.uniform(0, 2 * np.pi)))))
    return out


def check_c3():
    rng = np.random.default_rng(2)
    comp = recon = apply = 0.0
    for c in random_cp_triples(100):
        ks = kraus_operators(c)
        comp = max(comp, ks.completeness_residual())
        recon = max(recon, float(np.max(np.abs(choi_from_kraus(ks.operators) - ks.choi))))
        v = rng.normal(size=3)
        v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
        rho = QubitState.from_bloch(*v)
        x, y = apply_kraus(ks, rho), apply_map(c, rho)
        apply = max(apply, abs(x.rho11 - y.rho11), abs(x.rho12 - y.rho12))
    ok = comp <= 1e-12 and recon <= 1e-10 and apply <= 1e-12
    return ok, f"completeness {comp:.1e}, Choi reconstruction {recon:.1e}, apply_kraus vs apply_map {apply:.1e}"


def _c4(branch):
    hot = from_physical(100, 100, 1, 100, 300, branch)
    t = np.linspace(0.0, 100.0, 20001)
    min_hot = float(np.min(coherence_evolution(hot, 1.0, t)))
    cold = coherence_threshold_time(from_physical(100, 100, 1, 100, 1e-4, branch), 0.8, 1000.0)
    ok = min_hot >= 0.8 and cold is not None and 150 <= cold <= 600
    return ok, f"{branch.value}: min C/C0 on [0,100] us at 300 K = {min_hot:.3f}, 80% time at 1e-4 K = {cold} us"


def check_c4():
    return _c4(Branch.UNITARY)


def check_c5():
    p = ModelParams(1.0, 1.0, 1.0, 10_000, math.inf)
    avg = averaged_coefficients(p)
    gap = abs(avg.alpha_bar - avg.beta_bar)
    dist = 0.0
    for rho0 in (QubitState.excited(), QubitState.ground(), QubitState.maximally_coherent()):
        r = time_averaged_state(p, rho0, avg)
        dist = max(dist, math.hypot(r.rho11 - 0.5, abs(r.rho12)))
    return gap <= 1e-2 and dist <= 1e-2, f"|alpha_bar - beta_bar| = {gap:.1e}, max trace distance {dist:.1e}"


def check_c6():
    temps = (0.1, 1.0, 10.0, 100.0)
    vals = {n: [information_trapping(ModelParams(1.0, 1.0, 0.5, n, T)) for T in temps] for n in (10, 100)}
    dec = all(all(x > y for x, y in zip(v, v[1:])) for v in vals.values())
    size = all(a > b for a, b in zip(vals[10], vals[100]))
    detail = "; ".join(f"N={n}: " + ", ".join(f"{x:.4g}" for x in v) for n, v in vals.items())
    return dec and size, detail


def check_c7():
    base = ModelParams(1.0, 1.0, 1.0, 100)
    hits = resonance_scan(base, (0.1, 2.0), 1000)
    if not hits:
        return False, "no resonance found"
    eps = hits[0].epsilon_candidates[0]
    p = base.replace(epsilon=eps)
    level_ok = C7_LEVEL in hits[0].integer_levels and abs(frequency_mismatch(p, C7_LEVEL)) <= 1e-9
    hit = abs(tone_expansion(p).cesaro(C7_HORIZON))
    baselines = []
    for s in (0.99, 1.01):
        q = base.replace(epsilon=eps * s)
        if resonant_delta(q) != 0:
            return False, f"baseline coupling {eps * s} is itself resonant"
        baselines.append(abs(tone_expansion(q).cesaro(C7_HORIZON)))
    reg = (math.isclose(eps, C7_EPSILON, rel_tol=1e-12) and math.isclose(hit, C7_HIT, rel_tol=1e-6)
           and all(math.isclose(x, y, rel_tol=1e-6) for x, y in zip(baselines, C7_BASELINES)))
    ok = level_ok and hit > 10 * max(baselines) and reg
    return ok, (f"{len(hits)} resonant couplings; eps={eps:.6f} level {C7_LEVEL}: |Delta_bar|={hit:.3e} "
                f"vs baseline {max(baselines):.3e} at H={C7_HORIZON:g} (x{hit / max(baselines):.0f})")


def check_c8():
    p = ModelParams(1.0, 1.0, 1.0, 2, 1.0)
    link = entropy_sign_linkage(p, QubitState(0.8, 0.2), np.linspace(0.0, 50.0, 50001))
    return link.mismatch_fraction <= 0.02, f"symmetric difference {100 * link.mismatch_fraction:.3f}% of [0, 50]"


def check_c9():
    t = np.linspace(20.0, 50.0, 3001)
    rho0 = QubitState(0.5)
    hot = balance_scan(ModelParams(1.0, 1.0, 1.0, 10_000, 100.0), rho0, t)
    cold = balance_scan(ModelParams(1.0, 1.0, 1.0, 10, 0.1), rho0, t)
    dh, dc = hot.max_deviation(), cold.max_deviation()
    ok = dh <= 0.05 and dc >= 0.2
    return ok, (f"T=100,N=1e4: max|D-1| = {dh:.1e} ({100 * hot.excluded_fraction:.0f}% excluded); "
                f"T=0.1,N=10: max|D-1| = {dc:.2g}")


CHECKS = {f"C{i}": globals()[f"check_c{i}"] for i in range(1, 10)}


@pytest.mark.parametrize("name", list(CHECKS))
def test_criterion(name, report):
    ok, detail = CHECKS[name]()
    report(name, ok, detail)
    assert ok, detail


def test_c4_mirrored_branch_informational(report):
    # Not a criterion: the opposite sign choice, for comparison with C4.
    ok, detail = _c4(Branch.MIRRORED)
    report("C4 (mirrored, informational)", ok, detail)


if __name__ == "__main__":
    for name, fn in CHECKS.items():
        ok, detail = fn()
        print(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    ok, detail = _c4(Branch.MIRRORED)
    print(f"C4 (mirrored, informational): {'PASS' if ok else 'FAIL'}  {detail}")
