import json
import math

import numpy as np
import pytest

from cornergrowth.distributions import PointMass, Uniform
from cornergrowth.shape import ShapeProblem, shape_value
from cornergrowth.verify import (
    TestReport,
    _branches,
    check_duality,
    check_F_pushforward,
    check_increment_stationarity,
    check_stationary_mean,
    format_table,
    mc_shape_estimate,
)

UNI = ShapeProblem(Uniform(0.5, 1.5), Uniform(0.5, 1.5))
GEO = ShapeProblem(Uniform(0.3, 0.6), Uniform(0.2, 0.9), "geometric")


def test_report_invariant_and_json():
    rep = check_F_pushforward(1.0, 1.0, "exponential", 20_000, seed=3)
    assert rep.passed == (rep.statistic <= rep.threshold)
    d = json.loads(rep.to_json())
    assert d["pass"] == rep.passed and d["seed"] == 3 and d["sample_size"] == 20_000
    assert len(d["details"]["subtests"]) == 6
    assert "PASS" in format_table([rep]) or "FAIL" in format_table([rep])


def test_reports_reproducible_from_seed():
    a = check_F_pushforward(0.5, 2.0, "exponential", 10_000, seed=8)
    b = check_F_pushforward(0.5, 2.0, "exponential", 10_000, seed=8)
    assert a == b
    c = check_F_pushforward(0.5, 2.0, "exponential", 10_000, seed=9)
    assert c.statistic != a.statistic


@pytest.mark.parametrize("model,a,b", [("exponential", 1.0, 1.0), ("geometric", 0.3, 0.5)])
def test_pushforward_and_controls(model, a, b):
    assert check_F_pushforward(a, b, model, 100_000, seed=101).passed
    assert check_F_pushforward(a, b, model, 100_000, seed=101, mode="identity").passed
    assert not check_F_pushforward(a, b, model, 100_000, seed=101, mode="drop_w").passed


def test_pushforward_invalid_parameters():
    with pytest.raises(ValueError):
        check_F_pushforward(0.0, 1.0, "exponential", 100, 1)
    with pytest.raises(ValueError):
        check_F_pushforward(0.5, 1.0, "geometric", 100, 1)


def test_stationarity_boundary_row_by_construction():
    rep = check_increment_stationarity(UNI, 0.1, 5_000, [0], seed=4)
    assert rep.passed


def test_stationarity_geometric_and_control():
    assert check_increment_stationarity(GEO, 0.9, 5_000, [1, 20], seed=6).passed
    assert not check_increment_stationarity(GEO, 0.9, 5_000, [1, 20], seed=6, cdf_shift=0.2).passed


def test_duality_uniform_small():
    rep = check_duality(UNI, [-0.3, 0.0, 0.25], 500)
    assert rep.passed and rep.statistic <= 1e-6


def test_duality_point_masses_maximiser():
    lam = 1.0
    pm = ShapeProblem(PointMass(lam / 2), PointMass(lam / 2))
    res = 2000
    for z in (-0.3, -0.1):
        rep = check_duality(pm, [z], res)
        # the first branch is maximised at sqrt(t) = (lam/2 + z)/(lam/2 - z)
        t_star = ((lam / 2 + z) / (lam / 2 - z)) ** 2
        assert abs(rep.details["per_z"][0]["t_star_grid"] - t_star) <= 1.0 / res
        h1, _ = _branches(pm, z, np.array([t_star]))
        assert h1[0] == pytest.approx(1 / (lam / 2 + z) + 1 / (lam / 2 - z), rel=1e-12)
        assert rep.passed


def test_duality_symmetric_branches_agree():
    t = np.linspace(0, 1, 1001)
    h1, h2 = _branches(UNI, 0.0, t)
    assert h1.max() == pytest.approx(h2.max(), rel=1e-14)


def test_mc_single_cell():
    lam = 1.6
    pm = ShapeProblem(PointMass(lam / 2), PointMass(lam / 2))
    est = mc_shape_estimate(pm, 1, 1, 1, 4000, seed=12)
    assert abs(est.mean - 1 / lam) <= 3 * est.stderr


def test_mc_threads_do_not_change_values():
    a = mc_shape_estimate(UNI, 1, 1, 60, 6, seed=5, threads=1)
    b = mc_shape_estimate(UNI, 1, 1, 60, 6, seed=5, threads=4)
    assert np.array_equal(a.values, b.values)


def test_mc_errors():
    with pytest.raises(ValueError):
        mc_shape_estimate(UNI, 1, 1, 0, 3, seed=1)


def test_stationary_mean_point_masses_exact():
    lam = 1.5
    pm = ShapeProblem(PointMass(lam / 2), PointMass(lam / 2))
    rep = check_stationary_mean(pm, 0.0, 100, 10, seed=2)
    assert rep.details["mean_exact_over_n"] == pytest.approx(4 / lam, rel=1e-14)
    assert rep.details["g_z_11"] == pytest.approx(4 / lam, rel=1e-15)
    assert rep.passed


def test_stationary_mean_control():
    rep = check_stationary_mean(UNI, 0.2, 200, 10, seed=3, omit_boundary=True)
    assert not rep.passed
    assert rep.details["mean_G_over_n"] < rep.details["g_z_11"]
    assert check_stationary_mean(UNI, 0.2, 200, 10, seed=3).passed


def test_test_report_is_not_collected():
    assert TestReport.__test__ is False
    assert math.isfinite(shape_value(UNI, 1, 1))
