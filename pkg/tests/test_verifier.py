import math

import numpy as np
import pytest

from tlcurv.engine import flrw, minkowski, model_chart, orthonormal_frame
from tlcurv.mdfun import CurvatureBound
from tlcurv.verifier import (
    CONDITIONS, SamplingError, Verdict, check_condition, dalembert_check, hessian_check, jacobi_t4_check, measure,
    smooth_scan, theta_grid,
)

below = CurvatureBound


def above(K):
    return CurvatureBound(K, "above")


def test_flat_triangle_is_exact():
    v = check_condition(minkowski(2), below(0.0), "triangle", 500, seed=0)
    assert v.passed and abs(v.worst_margin) <= 1e-7
    assert v.samples == 500 and v.margins.shape[0] == 500


def test_model_hinge_equality():
    v = check_condition(model_chart(1.0), below(1.0), "hinge", 500, seed=0)
    assert v.passed and abs(v.worst_margin) <= 1e-6


def test_de_sitter_violates_below_by_zero():
    v = check_condition(model_chart(1.0), below(0.0), "triangle", 500, seed=0)
    assert not v.passed and v.worst_margin < -1e-3
    w = v.witness
    assert set(w["points"]) >= {"p", "q", "r"}
    assert w["values"]["tau"] > w["values"]["model_tau"]


@pytest.mark.parametrize("condition", CONDITIONS)
def test_each_condition_flat_both_sides(condition):
    for bound in (below(0.0), above(0.0)):
        v = check_condition(minkowski(3), bound, condition, 60, seed=1)
        assert v.passed and abs(v.worst_margin) <= 1e-5, (condition, bound, v.worst_margin)


def test_above_orientation_flips_margins():
    b = check_condition(model_chart(-1.0), below(0.0), "triangle", 60, seed=2)
    a = check_condition(model_chart(-1.0), above(0.0), "triangle", 60, seed=2)
    np.testing.assert_array_equal(a.margins, -b.margins)
    assert b.passed and not a.passed


def test_pass_iff_margin_within_tol():
    v = Verdict("triangle", below(0.0), 1, -2e-5, {}, 0, 1e-5)
    assert not v.passed
    assert Verdict("triangle", below(0.0), 1, -1e-5, {}, 0, 1e-5).passed
    d = v.to_dict()
    assert set(d) == {"condition", "K", "side", "samples", "seed", "tol", "pass", "worst_margin", "witness"}


def test_hinge_angle_duality():
    for Kp in (1.0, -1.0):
        a = check_condition(model_chart(Kp), below(0.0), "angle", 120, seed=3)
        h = check_condition(model_chart(Kp), below(0.0), "hinge", 120, seed=3)
        am, hm = a.margins.min(axis=1), h.margins.min(axis=1)
        both = (np.abs(am) > 1e-6) & (np.abs(hm) > 1e-6)
        assert both.sum() > 50
        assert np.all(np.sign(am[both]) == np.sign(hm[both]))


def test_determinism_and_seed_sensitivity():
    chart = model_chart(1.0)
    measure.cache_clear()
    v1 = check_condition(chart, below(0.5), "convexity", 40, seed=5)
    measure.cache_clear()
    v2 = check_condition(chart, below(0.5), "convexity", 40, seed=5)
    assert v1.worst_margin == v2.worst_margin and v1.witness == v2.witness
    v3 = check_condition(chart, below(0.5), "convexity", 40, seed=6)
    assert v3.worst_margin != v1.worst_margin


def test_monotonicity_theta_only_on_relation_set():
    rec = measure(model_chart(1.0), "monotonicity", 20, 0)
    th = theta_grid(1.0, rec)
    tau = rec["tau"]
    assert th.shape == tau.shape
    assert np.all(np.isnan(th[tau <= 1e-8]))
    assert np.all(np.isfinite(th[tau > 1e-8]))


def test_unknown_condition_and_bad_samples():
    with pytest.raises(ValueError):
        check_condition(minkowski(2), below(0.0), "quadrilateral", 10)
    with pytest.raises(ValueError):
        check_condition(minkowski(2), below(0.0), "triangle", 0)


def test_strongly_negative_bound_shrinks_the_sampling_region():
    # D_K = pi / 100 is far below the chart radius; configurations are sampled inside D_K / 2
    v = check_condition(model_chart(-1.0), below(-1e4), "triangle", 20, seed=0)
    assert v.witness["values"]["c"] < 0.5 * math.pi / 100
    # curvature -1 > -1e4, so the below-side comparison fails
    assert not v.passed


def test_empty_comparison_set_is_a_sampling_error(monkeypatch):
    import tlcurv.verifier.conditions as cond

    # without shrinking, every sampled triangle is longer than D_K = pi / 1000
    monkeypatch.setattr(cond, "within_reach", lambda chart, K: chart)
    with pytest.raises(SamplingError):
        check_condition(model_chart(-1.0), below(-1e6), "triangle", 10)


def test_hessian_minkowski_equality():
    for part, tol in (("timelike_tau", 1e-5), ("signed_distance_all_v", 1e-6)):
        v = hessian_check(minkowski(4), below(0.0), part, 100, seed=0)
        assert v.condition == "hessian" and v.witness["part"] == part
        assert abs(v.worst_margin) <= tol


def test_hessian_model_coth():
    v = hessian_check(model_chart(1.0), below(1.0), "timelike_tau", 100, seed=0)
    assert abs(v.worst_margin) <= 1e-5


def test_dalembert_equalities():
    assert abs(dalembert_check(minkowski(4), below(0.0), 60, seed=0).worst_margin) <= 1e-5
    assert abs(dalembert_check(model_chart(1.0), below(1.0), 60, seed=0).worst_margin) <= 1e-5


def test_dalembert_flrw_side_flip():
    chart = flrw("fluid_consistent")
    b = dalembert_check(chart, below(0.0), 30, seed=0)
    a = dalembert_check(chart, above(0.0), 30, seed=0)
    np.testing.assert_array_equal(a.margins, -b.margins)
    # timelike curvature -15/16 < 0: the below-by-0 comparison holds with slack
    assert b.passed and b.worst_margin > 0 and not a.passed


@pytest.mark.parametrize("chart, expected", [(minkowski(2), 0.0), (model_chart(1.0), 1 / 3),
                                             (model_chart(-1.0), -1 / 3)])
def test_jacobi_t4(chart, expected):
    x = chart.center
    E = orthonormal_frame(chart, x)
    res = jacobi_t4_check(chart, x, E[0], E[1])
    assert res.predicted == pytest.approx(expected, abs=1e-9)
    assert res.fitted == pytest.approx(expected, abs=1e-3 if expected else 1e-8)
    assert abs(res.t3) <= 1e-6 and res.passed


def test_jacobi_t4_requires_orthonormal_pair():
    chart = minkowski(2)
    with pytest.raises(ValueError):
        jacobi_t4_check(chart, np.zeros(2), np.array([1.0, 0.0]), np.array([0.5, 1.0]))


@pytest.mark.parametrize("chart, K, tol", [(minkowski(4), 0.0, 1e-9), (model_chart(1.0), 1.0, 1e-6)])
def test_smooth_scan_constant_curvature(chart, K, tol):
    res = smooth_scan(chart, planes=10_000, seed=0)
    assert res.inf_K == pytest.approx(K, abs=tol) and res.sup_K == pytest.approx(K, abs=tol)
    assert res.planes == 10_000


def test_smooth_scan_flrw_planes():
    chart = flrw("fluid_consistent")
    res = smooth_scan(chart, planes=2000, seed=1)
    assert res.sup_K <= 1e-6
    sp = smooth_scan(chart, region=(np.zeros(4), np.array([0.0, 0.5, 0.5, 0.5])), planes=200, seed=1,
                     kind="spacelike")
    assert sp.inf_K == pytest.approx(-0.9375, abs=1e-4)
    assert set(res.witnesses) == {"inf", "sup"}
    assert res.witnesses["sup"]["K"] == res.sup_K
