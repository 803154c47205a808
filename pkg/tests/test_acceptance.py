"""Acceptance criteria, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` (or this file directly); the
terminal summary prints one PASS/FAIL line per criterion.  All seeds used
are the module-level constants below.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from cornergrowth.distributions import PointMass, ShiftedPower, TabulatedDensity, Uniform
from cornergrowth.harness import ExperimentConfig, run
from cornergrowth.lpp import last_passage
from cornergrowth.shape import (
    ShapeProblem,
    closed_form_uniform,
    critical_cone,
    g_z_value,
    gradient,
    homogeneous_geometric,
    shape_value,
)
from cornergrowth.verify import (
    check_duality,
    check_F_pushforward,
    check_increment_stationarity,
    check_stationary_mean,
    mc_shape_estimate,
)

from oracles import brute_force_last_passage

# published seeds
SEED_AC1 = 1
SEED_AC5 = 5
SEED_AC6 = 20_240_606
SEEDS_AC7 = {-0.2: 70_001, 0.0: 70_002, 0.3: 70_003}
SEED_AC9 = 90_009
SEEDS_AC10 = {100: 100_100, 400: 100_400, 1600: 101_600}
SEED_AC11 = 11
SEED_AC12 = 12_012

UNI = ShapeProblem(Uniform(0.5, 1.5), Uniform(0.5, 1.5))
POWER = ShapeProblem(ShiftedPower(0.0, 2, 0.0, 1.0), ShiftedPower(1.0, 3, 1.0, 2.0))
TWO_LN3 = 2 * math.log(3)


def log_form_uniform(s, t):
    D = np.sqrt((s - t) ** 2 + 16 * s * t)
    return s * np.log(1 + (3 * s + t + D) / (4 * s)) + t * np.log(1 + (3 * t + s + D) / (4 * t))


@pytest.mark.acceptance(1, "closed-form agreement for uniform marginals (100 tuples, 1e-7 rel, < 5 s)")
def test_ac1_closed_form_agreement():
    rng = np.random.default_rng(SEED_AC1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        lam = rng.uniform(0.2, 3)
        l, m = rng.uniform(0, 2, size=2)
        s, t = rng.uniform(0.1, 10, size=2)
        problem = ShapeProblem(Uniform(lam / 2, lam / 2 + l), Uniform(lam / 2, lam / 2 + m))
        exact = closed_form_uniform(lam, l, m, s, t)
        worst = max(worst, abs(shape_value(problem, s, t) - exact) / exact)
    elapsed = time.perf_counter() - start
    assert worst <= 1e-7
    assert elapsed < 5.0


@pytest.mark.acceptance(2, "uniform(1/2, 3/2) display formula consistency on a 50x50 grid (1e-10)")
def test_ac2_log_form_consistency():
    s, t = np.meshgrid(np.linspace(0.1, 10, 50), np.linspace(0.1, 10, 50))
    assert np.max(np.abs(closed_form_uniform(1, 1, 1, s, t) - log_form_uniform(s, t))) <= 1e-10
    assert closed_form_uniform(1, 1, 1, 1.0, 1.0) == pytest.approx(2.1972246, abs=5e-8)
    assert float(log_form_uniform(1.0, 1.0)) == pytest.approx(2.1972246, abs=5e-8)


@pytest.mark.acceptance(3, "critical cone of the power-law marginals within 1e-5")
def test_ac3_critical_cone():
    cone = critical_cone(POWER)
    assert abs(cone.c1 - 0.105922) <= 1e-5
    assert abs(cone.c2 - 5.863092) <= 1e-5


@pytest.mark.acceptance(4, "homogeneous exponential and geometric reductions within 1e-9")
def test_ac4_homogeneous():
    s, t = np.meshgrid(np.linspace(0.05, 8, 40), np.linspace(0.05, 8, 40))
    for lam in (0.3, 1.0, 2.0, 5.0):
        problem = ShapeProblem(PointMass(lam / 2), PointMass(lam / 2))
        assert np.max(np.abs(shape_value(problem, s, t) - (np.sqrt(s) + np.sqrt(t)) ** 2 / lam)) <= 1e-9
    for q in (0.1, 0.5, 0.8):
        problem = ShapeProblem(PointMass(math.sqrt(q)), PointMass(math.sqrt(q)), "geometric")
        assert np.max(np.abs(shape_value(problem, s, t) - homogeneous_geometric(q, s, t))) <= 1e-9


@pytest.mark.acceptance(5, "recursion equals exhaustive path maximisation on 200 grids up to 8x8 (exact, < 10 s)")
def test_ac5_exact_dp():
    rng = np.random.default_rng(SEED_AC5)
    start = time.perf_counter()
    for k in range(200):
        m, n = rng.integers(1, 9, size=2)
        W = rng.integers(0, 20, size=(m, n)).astype(float) if k % 2 else rng.exponential(size=(m, n))
        assert last_passage(W).at(m, n) == brute_force_last_passage(W)
    assert time.perf_counter() - start < 10.0


EXP_PAIRS = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)]
GEO_PAIRS = [(0.3, 0.5), (0.7, 0.7)]


@pytest.mark.acceptance(6, "involution pushforward at n = 1e5 and failing drop-w controls")
@pytest.mark.parametrize("model,a,b", [("exponential", *p) for p in EXP_PAIRS] + [("geometric", *p) for p in GEO_PAIRS])
def test_ac6_pushforward(model, a, b):
    assert check_F_pushforward(a, b, model, 100_000, SEED_AC6).passed
    assert not check_F_pushforward(a, b, model, 100_000, SEED_AC6, mode="drop_w").passed


@pytest.mark.acceptance(7, "increment stationarity on rows 1, 10, 100 at n = 1e4 and failing z-mismatch controls")
@pytest.mark.parametrize("z", sorted(SEEDS_AC7))
def test_ac7_stationarity(z):
    seed = SEEDS_AC7[z]
    assert check_increment_stationarity(UNI, z, 10_000, [1, 10, 100], seed).passed
    assert not check_increment_stationarity(UNI, z, 10_000, [1, 10, 100], seed, cdf_shift=0.2).passed


@pytest.mark.acceptance(8, "duality gap over 9 interior z at most 1e-5 (t resolution 1e4, < 60 s)")
def test_ac8_duality():
    start = time.perf_counter()
    z_grid = np.linspace(-0.5, 0.5, 11)[1:-1]
    rep = check_duality(UNI, z_grid, 10_000, threshold=1e-5)
    assert rep.passed and rep.statistic <= 1e-5
    assert time.perf_counter() - start < 60.0


@pytest.mark.acceptance(9, "stationary mean within 4 standard errors at n = 500 with 20 replicas")
@pytest.mark.parametrize(
    "problem,z",
    [(UNI, 0.0), (UNI, 0.2), (ShapeProblem(Uniform(0.3, 0.6), Uniform(0.2, 0.9), "geometric"), 0.85)],
    ids=["exponential-z0", "exponential-z0.2", "geometric"],
)
def test_ac9_stationary_mean(problem, z):
    assert check_stationary_mean(problem, z, 500, 20, SEED_AC9).passed
    assert not check_stationary_mean(problem, z, 500, 20, SEED_AC9, omit_boundary=True).passed


@pytest.mark.acceptance(10, "Monte Carlo means increase over n = 100, 400, 1600 and end within 2% of 2 ln 3 (< 3 min)")
def test_ac10_convergence():
    start = time.perf_counter()
    means = [mc_shape_estimate(UNI, 1.0, 1.0, n, 20, SEEDS_AC10[n], threads=1).mean for n in (100, 400, 1600)]
    assert means[0] < means[1] < means[2]
    assert abs(means[2] - TWO_LN3) / TWO_LN3 <= 0.02
    assert time.perf_counter() - start < 180.0


PROPERTY_PROBLEMS = {
    "uniform": UNI,
    "power": POWER,
    "mixed": ShapeProblem(Uniform(0.2, 1.0), ShiftedPower(0.1, 3, 0.3, 0.9)),
    "geometric": ShapeProblem(Uniform(0.2, 0.6), ShiftedPower(0.1, 2, 0.3, 0.9), "geometric"),
}


@pytest.mark.acceptance(11, "shape function property suites")
@pytest.mark.parametrize("name", sorted(PROPERTY_PROBLEMS))
def test_ac11_properties(name):
    p = PROPERTY_PROBLEMS[name]
    rng = np.random.default_rng(SEED_AC11)
    s, t = rng.uniform(0.05, 10, size=(2, 60))
    c = rng.uniform(1e-3, 10, size=60)
    g = np.asarray(shape_value(p, s, t))
    # homogeneity
    assert np.max(np.abs(np.asarray(shape_value(p, c * s, c * t)) - c * g) / (c * g)) <= 1e-10
    # concavity
    s2, t2 = rng.uniform(0.05, 10, size=(2, 60))
    mid = np.asarray(shape_value(p, (s + s2) / 2, (t + t2) / 2))
    assert np.all(mid >= (g + np.asarray(shape_value(p, s2, t2))) / 2 - 1e-12 * mid)
    # symmetry
    assert np.max(np.abs(np.asarray(shape_value(p.swapped(), t, s)) - g) / g) <= 1e-10
    # upper bound by g_z on 50 sampled z
    lo, hi = p.interval
    for z in rng.uniform(lo, hi, size=50):
        assert np.all(g <= np.asarray(g_z_value(p, z, s, t)) * (1 + 1e-14))
    # gradient against finite differences, and the Euler identity
    h = 1e-6
    for k in range(15):
        gs, gt = gradient(p, s[k], t[k])
        fs = (shape_value(p, s[k] + h, t[k]) - shape_value(p, s[k] - h, t[k])) / (2 * h)
        ft = (shape_value(p, s[k], t[k] + h) - shape_value(p, s[k], t[k] - h)) / (2 * h)
        assert abs(gs - fs) <= 1e-5 and abs(gt - ft) <= 1e-5
        assert abs(s[k] * gs + t[k] * gt - g[k]) <= 1e-9 * g[k]


@pytest.mark.acceptance(11, "shape function property suites")
def test_ac11_diagonal_and_degenerate():
    for mu in (Uniform(0.5, 1.5), ShiftedPower(0.0, 2, 0.0, 1.0), ShiftedPower(0.3, 1, 0.4, 2.0)):
        p = ShapeProblem(mu, mu)
        for s in (0.2, 1.0, 6.0):
            assert abs(shape_value(p, s, s) - 2 * s * p.A(0.0)) <= 1e-9 * s
    x = np.linspace(0, 1, 5)
    tri = TabulatedDensity(x, 2 * x)
    p = ShapeProblem(tri, tri)
    for s, t in [(1, 1), (0.3, 4.0), (7.0, 0.2)]:
        assert abs(shape_value(p, s, t) - (2 * s + 2 * t)) <= 1e-9
    closed = ShapeProblem(ShiftedPower(0.0, 1, 0.0, 1.0), ShiftedPower(0.0, 1, 0.0, 1.0))
    assert abs(shape_value(closed, 0.7, 1.9) - 5.2) <= 1e-9


def _cli_payload(args):
    proc = subprocess.run([sys.executable, "-m", "cornergrowth", *args], capture_output=True, text=True, check=True)
    d = json.loads(proc.stdout)
    return json.dumps(d["results"], sort_keys=True), d["config"]


@pytest.mark.acceptance(12, "run reports bit-identical on rerun and under --threads 1 vs 8")
def test_ac12_reproducibility():
    raw = {
        "problem": {"alpha": {"kind": "uniform", "lo": 0.5, "hi": 1.5}, "beta": {"kind": "uniform", "lo": 0.5, "hi": 1.5}},
        "task": "convergence-study",
        "parameters": {"n_min": 25, "n_max": 200, "factor": 2, "replicas": 8},
        "master_seed": SEED_AC12,
    }
    cfg = ExperimentConfig.from_dict(raw)
    a, b, c = run(cfg, threads=1), run(cfg, threads=1), run(cfg, threads=8)
    assert a.numeric_payload() == b.numeric_payload() == c.numeric_payload()
    uni = json.dumps(raw["problem"]["alpha"])
    base = ["simulate", "--alpha", uni, "--beta", uni, "--n", "120", "--replicas", "6", "--seed", str(SEED_AC12), "--z", "0.1"]
    one = _cli_payload(base + ["--threads", "1"])
    eight = _cli_payload(base + ["--threads", "8"])
    assert one == eight


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
