"""Direct curvature checks: the Jacobi-field t^4 coefficient and sectional-curvature scans."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from tlcurv.engine.chart import (
    _points, inner, orthonormal_frame, random_unit_timelike, riemann_lowered, sectional_curvature,
    unit_orthogonal_spacelike,
)
from tlcurv.engine.geodesic import jacobi_batch
from tlcurv.verifier.sampling import uniform_block
from tlcurv.verifier.verdict import jsonable

FIT_RANGE = (0.05, 0.3)
FIT_POINTS = 60
FIT_DEGREE = 5
JACOBI_TOL = 1e-12
SCAN_RAPIDITY = 2.0


class JacobiT4Result(NamedTuple):
    fitted: float
    predicted: float
    t3: float
    margin: float
    passed: bool


def jacobi_t4_check(chart, x, v, w, tol: float = 1e-3) -> JacobiT4Result:
    """Fit the ``t^4`` coefficient of ``<J, J>`` for ``J(0) = 0, J'(0) = 2v - w`` along ``exp_x(tv)``.

    The exact ``t^2`` term ``<A, A> t^2`` is removed first; the remainder divided
    by ``t^3`` is fitted by a degree-5 polynomial, whose constant and linear
    coefficients are the ``t^3`` and ``t^4`` coefficients.
    """
    x = _points(chart, x)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (abs(inner(chart, x, v, v) + 1) < 1e-9 and abs(inner(chart, x, w, w) - 1) < 1e-9
            and abs(inner(chart, x, v, w)) < 1e-9):
        raise ValueError("v must be unit timelike and w unit spacelike orthogonal to v")
    A = 2.0 * v - w
    t = np.linspace(*FIT_RANGE, FIT_POINTS)
    # J along gamma_v at time t equals the field along gamma_{tv} at time 1 with initial slope tA
    tr = jacobi_batch(chart, x, t[:, None] * v, np.zeros_like(A), t[:, None] * A, 1.0, tol=JACOBI_TOL)
    if tr.exited.any():
        raise ValueError("geodesic leaves the chart before t = 0.3")
    n = chart.dim
    y = tr.y_end
    JJ = inner(chart, y[:, :n], y[:, 2 * n : 3 * n], y[:, 2 * n : 3 * n])
    rem = (JJ - inner(chart, x, A, A) * t * t) / t**3
    coef = np.polynomial.polynomial.polyfit(t, rem, FIT_DEGREE)
    t3, fitted = float(coef[0]), float(coef[1])
    R = riemann_lowered(chart, x)
    predicted = float(-np.einsum("abcd,a,b,c,d->", R, A, v, A, v) / 3.0)
    margin = -abs(fitted - predicted)
    return JacobiT4Result(fitted, predicted, t3, margin, bool(margin >= -tol and abs(t3) <= 1e-6))


class ScanResult(NamedTuple):
    inf_K: float
    sup_K: float
    witnesses: dict
    planes: int


def _region_points(chart, region, count, seed):
    centre, half = region if region is not None else (chart.center, 0.5 * chart.convex_radius)
    centre = np.broadcast_to(np.asarray(centre, dtype=float), (chart.dim,))
    half = np.broadcast_to(np.asarray(half, dtype=float), (chart.dim,))
    u = uniform_block(seed, 21, 2 * count + 16, chart.dim)
    pts = centre + half * (2.0 * u - 1.0)
    pts = pts[chart.inside(pts)][:count]
    if len(pts) < count:
        raise ValueError(f"scan region has too little overlap with the domain of {chart.name}")
    return pts


def smooth_scan(chart, region=None, planes: int = 10_000, seed: int = 0, kind: str = "timelike") -> ScanResult:
    """Extremes of the sectional curvature over random tangent planes.

    ``region`` is ``(centre, half_width)`` of a coordinate box (default: half the
    convex radius around the chart centre). ``kind="timelike"`` samples planes
    spanned by a unit timelike ``v`` and a unit spacelike ``w`` orthogonal to it;
    ``kind="spacelike"`` samples planes orthogonal to the frame's time vector.
    """
    if kind not in ("timelike", "spacelike"):
        raise ValueError(f"kind must be 'timelike' or 'spacelike', got {kind!r}")
    if planes <= 0:
        raise ValueError("planes must be positive")
    n = chart.dim
    x = _region_points(chart, region, planes, seed)
    u = uniform_block(seed, 22, planes, 2 * n)
    E = orthonormal_frame(chart, x)
    if kind == "timelike":
        v, _ = random_unit_timelike(chart, x, u[:, :n], SCAN_RAPIDITY, E)
    else:
        if n < 3:
            raise ValueError("spacelike planes need dimension >= 3")
        v = unit_orthogonal_spacelike(chart, x, E[:, 0, :], u[:, : n - 1], E)
    w = unit_orthogonal_spacelike(chart, x, E[:, 0, :] if kind == "spacelike" else v, u[:, n : 2 * n - 1], E)
    if kind == "spacelike":
        # remove the v component to get a second spacelike direction orthogonal to both
        w = w - inner(chart, x, w, v)[:, None] * v
        w = w / np.sqrt(inner(chart, x, w, w))[:, None]
    K = sectional_curvature(chart, x, v, w, R=riemann_lowered(chart, x))
    lo, hi = int(np.argmin(K)), int(np.argmax(K))

    def wit(i):
        return jsonable({"point": x[i], "v": v[i], "w": w[i], "K": K[i]})

    return ScanResult(float(K[lo]), float(K[hi]), {"inf": wit(lo), "sup": wit(hi)}, planes)
