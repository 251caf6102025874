"""Acceptance criteria 1-11, each at its stated tolerance and runtime budget.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from tlcurv import modelspace as ms
from tlcurv.cli import flrw_demo
from tlcurv.comparison import HingeData, TriangleData, comparison_angle, realize_hinge
from tlcurv.engine import (
    anti_de_sitter_chart, de_sitter_chart, flrw, inner, minkowski, model_chart, model_embedding,
    orthonormal_frame, riemann_lowered,
)
from tlcurv.engine.geodesic import exp_batch
from tlcurv.mdfun import CurvatureBound, d_max, md_S, md_S_second
from tlcurv.verifier import (
    CONDITIONS, check_condition, dalembert_check, hessian_check, jacobi_t4_check, measure, smooth_scan,
)

MODEL_KS = (-1.0, 0.0, 1.0)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


@pytest.mark.criterion(1, "md IVP residuals")
def test_c01_md_ivp_residuals():
    with Budget(1.0):
        for K in MODEL_KS:
            neg = np.linspace(-min(d_max(K), 4.0), 0.0, 1001)[1:]
            pos = np.linspace(0.0, min(d_max(-K), 4.0), 1001)[:-1]
            r_neg = md_S_second(K, neg[:-1]) - K * md_S(K, neg[:-1]) + 1
            r_pos = md_S_second(K, pos[1:]) + K * md_S(K, pos[1:]) - 1
            assert np.max(np.abs(r_neg)) <= 1e-10 and np.max(np.abs(r_pos)) <= 1e-10
            # initial data: md_S(0) = 0, md_S'(0) = 0
            assert md_S(K, 0.0) == 0.0


@pytest.mark.criterion(2, "closed-form model tau vs integrated geodesics")
def test_c02_model_tau_vs_geodesics():
    with Budget(30.0):
        for K in MODEL_KS:
            chart = model_chart(K)
            rng = np.random.default_rng(20 + int(K))
            X = rng.uniform(-0.3, 0.3, (1000, 2))
            E = orthonormal_frame(chart, X)
            length = rng.uniform(0.05, 0.8, 1000)
            eta = rng.uniform(-1.0, 1.0, 1000)
            V = length[:, None] * (np.cosh(eta)[:, None] * E[:, 0] + np.sinh(eta)[:, None] * E[:, 1])
            Y, U, exited = exp_batch(chart, X, V)
            assert not exited.any()
            # the integrated curve is a unit-speed-times-length timelike geodesic
            speed = np.sqrt(-inner(chart, Y, U, U))
            assert np.max(np.abs(speed - length)) <= 1e-8
            tau = ms._tau(K, model_embedding(K, X), model_embedding(K, Y))
            assert np.max(np.abs(tau - length)) <= 1e-8


@pytest.mark.criterion(3, "triangle/hinge round trip and flat law of cosines")
def test_c03_triangle_hinge_round_trip():
    rng = np.random.default_rng(3)
    for K in MODEL_KS:
        a, b = rng.uniform(0.05, 0.6, (2, 1000))
        c = a + b + rng.uniform(1e-3, 0.6, 1000)
        worst = 0.0
        for ai, bi, ci in zip(a, b, c):
            omega, sign = comparison_angle(K, TriangleData(ai, bi, ci), "p")
            bb = realize_hinge(K, HingeData(omega, sign, (ai, ci))).endpoint_tau
            worst = max(worst, abs(bb - bi))
            if K == 0.0:
                assert abs(bi * bi - (ai * ai + ci * ci - 2 * ai * ci * math.cosh(omega))) <= 1e-9
        assert worst <= 1e-9


@pytest.mark.criterion(4, "flat equality suite")
def test_c04_flat_equality():
    with Budget(120.0):
        for chart in (minkowski(2), minkowski(4)):
            for side in ("below", "above"):
                for condition in CONDITIONS:
                    v = check_condition(chart, CurvatureBound(0.0, side), condition, 500, seed=0)
                    assert v.passed and abs(v.worst_margin) <= 1e-5, (chart.name, side, condition, v.worst_margin)


@pytest.mark.criterion(5, "direction matrix and cross-condition agreement")
def test_c05_direction_matrix():
    band = 1e-5
    with Budget(600.0):
        for Kp in MODEL_KS:
            chart = model_chart(Kp)
            for K in MODEL_KS:
                for side in ("below", "above"):
                    expected = K >= Kp - 1e-6 if side == "below" else K <= Kp + 1e-6
                    verdicts = {c: check_condition(chart, CurvatureBound(K, side), c, 150, seed=0, tol=band)
                                for c in CONDITIONS}
                    got = {c: v.passed for c, v in verdicts.items()}
                    assert set(got.values()) == {expected}, (Kp, K, side, got)


@pytest.mark.criterion(6, "curvature scan calibration and Riemann symmetries")
def test_c06_scan_and_symmetries():
    for Kp in MODEL_KS:
        res = smooth_scan(model_chart(Kp), planes=10_000, seed=0)
        assert abs(res.inf_K - Kp) <= 1e-6 and abs(res.sup_K - Kp) <= 1e-6
    charts = [minkowski(2), minkowski(4), de_sitter_chart(2), de_sitter_chart(4), anti_de_sitter_chart(2),
              model_chart(1.0), model_chart(0.0), model_chart(-1.0), flrw("fluid_consistent"), flrw("paper_literal")]
    for chart in charts:
        rng = np.random.default_rng(6)
        X = chart.center + 0.5 * chart.convex_radius * rng.uniform(-1, 1, (100, chart.dim))
        R = riemann_lowered(chart, X)
        assert np.max(np.abs(R + np.swapaxes(R, 1, 2))) <= 1e-6
        assert np.max(np.abs(R + np.swapaxes(R, 3, 4))) <= 1e-6
        assert np.max(np.abs(R - np.transpose(R, (0, 3, 4, 1, 2)))) <= 1e-6
        bianchi = R + np.transpose(R, (0, 1, 3, 4, 2)) + np.transpose(R, (0, 1, 4, 2, 3))
        assert np.max(np.abs(bianchi)) <= 1e-6, chart.name


@pytest.mark.criterion(7, "Hessian comparison")
def test_c07_hessian():
    for chart, K in ((minkowski(4), 0.0), (model_chart(1.0), 1.0)):
        for side in ("below", "above"):
            v = hessian_check(chart, CurvatureBound(K, side), "timelike_tau", 200, seed=0)
            assert abs(v.worst_margin) <= 1e-5, (chart.name, side, v.worst_margin)
    v = hessian_check(flrw("fluid_consistent"), CurvatureBound(0.0, "below"), "timelike_tau", 200, seed=0)
    assert v.worst_margin >= -1e-3


@pytest.mark.criterion(8, "d'Alembertian comparison")
def test_c08_dalembert():
    v = dalembert_check(minkowski(4), CurvatureBound(0.0), 200, seed=0)
    assert abs(v.worst_margin) <= 1e-5


@pytest.mark.criterion(9, "Jacobi t^4 coefficient")
def test_c09_jacobi_t4():
    for chart, expected in ((minkowski(2), 0.0), (model_chart(1.0), 1 / 3), (model_chart(-1.0), -1 / 3)):
        E = orthonormal_frame(chart, chart.center)
        res = jacobi_t4_check(chart, chart.center, E[0], E[1])
        assert abs(res.predicted - expected) <= 1e-9
        assert abs(res.fitted - expected) <= 1e-3
        assert abs(res.t3) <= 1e-6


@pytest.mark.criterion(10, "FLRW demo")
def test_c10_flrw_demo(tmp_path):
    with Budget(300.0):
        fl = flrw_demo("fluid_consistent", tmp_path / "fluid.json", planes=10_000)["flrw"]
        assert fl["rho"] < 0
        assert abs(fl["p_plus_rho"]) <= 1e-6
        assert fl["sup_timelike_curvature"] <= 1e-6
        assert abs(fl["spacelike_curvature_t0"] + 0.9375) <= 1e-4
        assert fl["timelike_above_by_0"] is True and fl["agh_below_by_0"] is False
        lit = flrw_demo("paper_literal", tmp_path / "literal.json", planes=10_000)["flrw"]
        for key in ("rho", "pressure", "p_plus_rho", "sup_timelike_curvature", "spacelike_curvature_t0"):
            assert math.isfinite(lit[key])
        assert (tmp_path / "literal.json").exists()


@pytest.mark.criterion(11, "determinism")
def test_c11_determinism():
    chart = model_chart(1.0)
    bound = CurvatureBound(0.5)
    runs = []
    for _ in range(2):
        measure.cache_clear()
        runs.append([
            *(check_condition(chart, bound, c, 50, seed=11) for c in CONDITIONS),
            hessian_check(chart, bound, "signed_distance_all_v", 50, seed=11),
            dalembert_check(chart, bound, 50, seed=11),
        ])
    for a, b in zip(*runs):
        assert a.passed == b.passed
        assert abs(a.worst_margin - b.worst_margin) <= 1e-12
        assert a.witness == b.witness
    s1, s2 = (smooth_scan(flrw(), planes=500, seed=11) for _ in range(2))
    assert s1.sup_K == s2.sup_K and s1.inf_K == s2.inf_K
