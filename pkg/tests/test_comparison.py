import math

import numpy as np
import pytest

from tlcurv import modelspace as ms
from tlcurv.comparison import (
    HingeData, NotRealizable, SizeBoundError, TriangleData, ComparisonError, comparison_angle,
    corresponding_point, hinge_endpoint_tau, realize_hinge, realize_triangle, signed_comparison_angle,
    spacetime_angle, triangle_placement,
)


def test_collinear_flat_triangle():
    rt = realize_triangle(0.0, TriangleData(1, 1, 2))
    np.testing.assert_allclose(rt.p.coords, [0, 0])
    np.testing.assert_allclose(rt.q.coords, [1, 0], atol=1e-12)
    np.testing.assert_allclose(rt.r.coords, [2, 0])


def test_flat_triangle_113():
    rt = realize_triangle(0.0, TriangleData(1, 1, 3))
    np.testing.assert_allclose(rt.r.coords, [3, 0])
    np.testing.assert_allclose(rt.q.coords, [1.5, math.sqrt(1.25)], atol=1e-12)


@pytest.mark.parametrize("K", [-1.0, -0.25, 0.0, 0.5, 1.0])
def test_realized_sides_reproduce_data(K):
    for a, b, c in [(0.3, 0.4, 0.9), (0.5, 0.5, 1.0), (0.1, 0.8, 1.2), (0.2, 0.2, 0.41)]:
        rt = realize_triangle(K, TriangleData(a, b, c))
        assert ms.model_tau(K, rt.p, rt.q) == pytest.approx(a, abs=1e-10)
        assert ms.model_tau(K, rt.q, rt.r) == pytest.approx(b, abs=1e-10)
        assert ms.model_tau(K, rt.p, rt.r) == pytest.approx(c, abs=1e-10)


def test_causal_triangle_has_null_side():
    rt = realize_triangle(0.0, TriangleData(0.0, 1.0, 2.0))
    assert ms.model_relation(0.0, rt.p, rt.q) is ms.Relation.NULL_RELATED
    assert ms.model_tau(0.0, rt.q, rt.r) == pytest.approx(1.0)
    assert rt.sides["pq"].character == "null"


def test_size_bound_and_realizability_errors():
    with pytest.raises(SizeBoundError):
        realize_triangle(-1.0, TriangleData(1, 1, math.pi))
    with pytest.raises(NotRealizable):
        realize_triangle(0.0, TriangleData(1, 1, 1.5))
    with pytest.raises(ComparisonError):
        TriangleData(-1, 1, 2)


def test_corresponding_points():
    rt = realize_triangle(0.0, TriangleData(1, 1, 3))
    np.testing.assert_allclose(corresponding_point(rt, "pr", 1.5).coords, [1.5, 0])
    np.testing.assert_allclose(corresponding_point(rt, "pq", 0.0).coords, rt.p.coords)
    np.testing.assert_allclose(corresponding_point(rt, "pq", 0.5).coords, [0.75, math.sqrt(1.25) / 2], atol=1e-12)
    with pytest.raises(ComparisonError):
        corresponding_point(rt, "pq", 2.0)


def test_comparison_angles():
    tri = TriangleData(1, 1, 3)
    w, s = comparison_angle(0.0, tri, "p")
    assert (w, s) == (pytest.approx(math.acosh(1.5)), -1)
    w, s = comparison_angle(0.0, tri, "q")
    assert (w, s) == (pytest.approx(math.acosh(3.5)), 1)
    w, s = comparison_angle(0.0, TriangleData(1, 1, 2), "p")
    assert w == pytest.approx(0.0, abs=1e-7) and s == -1


def test_spacetime_angle_examples():
    u = np.array([1.0, 0.0])
    assert spacetime_angle(u, u) == (0.0, -1)
    w, s = spacetime_angle(u, np.array([math.cosh(1), math.sinh(1)]))
    assert w == pytest.approx(1.0, abs=1e-15) and s == -1
    assert spacetime_angle(u, -u) == (0.0, 1)
    with pytest.raises(ComparisonError):
        spacetime_angle(u, np.array([0.0, 1.0]))


def test_hinge_examples():
    assert realize_hinge(0.0, HingeData(0.0, -1, (1, 3))).endpoint_tau == pytest.approx(2.0)
    assert realize_hinge(0.0, HingeData(math.acosh(1.5), -1, (1, 3))).endpoint_tau == pytest.approx(1.0)
    assert realize_hinge(0.0, HingeData(0.0, 1, (1, 1), ("future", "past"))).endpoint_tau == 0.0
    with pytest.raises(ComparisonError):
        HingeData(0.5, 1, (1, 1))


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
def test_vectorized_paths_agree_with_scalar(K):
    rng = np.random.default_rng(11)
    a = rng.uniform(0.1, 0.5, 20)
    b = rng.uniform(0.1, 0.5, 20)
    c = a + b + rng.uniform(0.01, 0.5, 20)
    for vertex in "pqr":
        vec = signed_comparison_angle(K, a, b, c, vertex)
        ref = [np.prod(comparison_angle(K, TriangleData(*t), vertex)) for t in zip(a, b, c)]
        np.testing.assert_allclose(vec, ref, atol=1e-9)
    P, Q, R = triangle_placement(K, a, b, c)
    np.testing.assert_allclose(ms._tau(K, P, Q), a, atol=1e-10)
    np.testing.assert_allclose(ms._tau(K, Q, R), b, atol=1e-10)
    w = -signed_comparison_angle(K, a, b, c, "p")
    np.testing.assert_allclose(hinge_endpoint_tau(K, w, -1, 1.0, 1.0, a, c), b, atol=1e-10)


def test_unrealizable_vectorized_angle_is_nan():
    assert np.isnan(signed_comparison_angle(0.0, 1.0, 1.0, 1.5, "p"))
