"""Sampled checks of the six synthetic comparison conditions.

Each condition splits into a chart-side measurement, which is expensive and
independent of the bound, and a cheap model-side margin for a given ``K``.
Measurements are cached per ``(chart, condition, samples, seed)`` so a sweep
over ``(K, side)`` integrates geodesics only once.

All margin functions return the margin of the ``below`` inequality with shape
``(N, k)`` (NaN where a column is undefined); :class:`CurvatureBound.orient`
flips it for ``above``.
"""

from __future__ import annotations

import functools

import numpy as np

from tlcurv import modelspace as ms
from tlcurv._trig import versq
from tlcurv.comparison import (
    hinge_endpoint_tau, point_on_side, signed_comparison_angle, triangle_placement,
)
from tlcurv.engine.chart import inner
from tlcurv.mdfun import CurvatureBound, d_max
from tlcurv.verifier.sampling import (
    MIN_SIDE_FRACTION, Columns, SamplingError, accumulate, base_points, exp_safe, orthonormal_frame, scaled,
    separation, spacelike_orthogonal, timelike_at, within_reach,
)
from tlcurv.verifier.verdict import CONDITIONS, Verdict, jsonable

EPS = 1e-6
DEFAULT_TOL = 1e-5
PAIRS = 5
GRID = 8
CURVE_POINTS = 65


def _tau_margin(tau_model, tau):
    return (tau_model - tau) / np.maximum(tau_model, EPS)


def _angle(ip):
    """Hyperbolic angle from ``|<u, v>|`` of unit timelike vectors, accurate near 0."""
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(np.abs(ip) - 1.0, 0.0) / 2.0))


def _size_ok(K, *sides):
    return np.all([np.asarray(s) < d_max(K) for s in sides], axis=0)


# -- timelike triangles -------------------------------------------------------


def _pairs_on_triangle(chart, p, q, a, b, u1, u2, sx, sy, bad):
    """Points ``x`` on ``pq`` at fraction ``sx`` and ``y`` on ``qr`` at fraction ``sy``."""
    N, n = p.shape
    k = sx.shape[1]
    origins = np.concatenate([np.repeat(p, k, axis=0), np.repeat(q, k, axis=0)])
    vecs = np.concatenate([(sx * a[:, None])[..., None] * u1[:, None, :],
                           (sy * b[:, None])[..., None] * u2[:, None, :]]).reshape(-1, n)
    ends, _, bad_all = exp_safe(chart, origins, vecs, np.tile(np.repeat(bad, k), 2))
    bad = bad | bad_all.reshape(2, N, k).any(axis=(0, 2))
    ends = ends.reshape(2, N, k, n)
    return ends[0], ends[1], bad


def _measure_triangle(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    p = base_points(chart, c.take(n), back=0.4)
    bad = ~chart.inside(p)
    u1 = timelike_at(chart, p, c.take(n))
    a = scaled(chart, c.scalar(), 0.1, 0.35)
    q, _, bad = exp_safe(chart, p, a[:, None] * u1, bad)
    u2 = timelike_at(chart, q, c.take(n))
    b = scaled(chart, c.scalar(), 0.1, 0.35)
    r, _, bad = exp_safe(chart, q, b[:, None] * u2, bad)
    sx = 0.1 + 0.8 * c.take(PAIRS)
    sy = 0.1 + 0.8 * c.take(PAIRS)
    sx[:, 3] = 0.0  # (p, y on qr)
    sy[:, 4] = 1.0  # (x on pq, r)
    cc, _, _ = separation(chart, p, r)
    x, y, bad = _pairs_on_triangle(chart, p, q, a, b, u1, u2, sx, sy, bad)
    tau = separation(chart, x.reshape(-1, n), y.reshape(-1, n))[0].reshape(-1, PAIRS)
    ok = ~bad & np.isfinite(cc) & np.all(np.isfinite(tau), axis=1) & (np.min(tau, axis=1) > MIN_SIDE_FRACTION * R)
    ok &= cc >= MIN_SIDE_FRACTION * R
    rec = dict(a=a, b=b, c=np.nan_to_num(cc), sx=sx, sy=sy, tau=np.nan_to_num(tau),
               pt_p=p, pt_q=q, pt_r=r, pts_x=x, pts_y=y, vec_pq=a[:, None] * u1, vec_qr=b[:, None] * u2)
    return ok, rec


def _margin_triangle(K, rec):
    a, b, c = rec["a"], rec["b"], rec["c"]
    P, Q, Rm = triangle_placement(K, a, b, c)
    xb = point_on_side(K, P[:, None], Q[:, None], rec["sx"])
    yb = point_on_side(K, Q[:, None], Rm[:, None], rec["sy"])
    tb = ms._tau(K, xb, yb)
    m = _tau_margin(tb, rec["tau"])
    m[~_size_ok(K, c)] = np.nan
    return m, {"model_tau": tb}


# -- causal triangles ---------------------------------------------------------


def _measure_causal(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    p = base_points(chart, c.take(n), back=0.4)
    bad = ~chart.inside(p)
    E = orthonormal_frame(chart, p)
    e0 = E[:, 0, :]
    m = spacelike_orthogonal(chart, p, e0, c.take(n - 1))
    a = 1e-4 + 9e-4 * c.scalar()
    ell = scaled(chart, c.scalar(), 0.1, 0.3)
    # <v, v> = -a^2 with v close to the null direction e0 + m
    v1 = ell[:, None] * (e0 + m) + (a * a / (4.0 * ell))[:, None] * (e0 - m)
    q, _, bad = exp_safe(chart, p, v1, bad)
    u2 = timelike_at(chart, q, c.take(n))
    b = scaled(chart, c.scalar(), 0.15, 0.35)
    r, _, bad = exp_safe(chart, q, b[:, None] * u2, bad)
    sy = 0.1 + 0.8 * c.take(PAIRS)
    cc, _, _ = separation(chart, p, r)
    y, _, bad_y = exp_safe(chart, np.repeat(q, PAIRS, axis=0),
                           (sy * b[:, None]).reshape(-1)[:, None] * np.repeat(u2, PAIRS, axis=0),
                           np.repeat(bad, PAIRS))
    bad |= bad_y.reshape(-1, PAIRS).any(axis=1)
    tau = separation(chart, np.repeat(p, PAIRS, axis=0), y)[0].reshape(-1, PAIRS)
    y = y.reshape(-1, PAIRS, n)
    ok = ~bad & np.isfinite(cc) & np.all(np.isfinite(tau), axis=1) & (np.min(tau, axis=1) > MIN_SIDE_FRACTION * R)
    rec = dict(a=a, b=b, c=np.nan_to_num(cc), sy=sy, tau=np.nan_to_num(tau),
               pt_p=p, pt_q=q, pt_r=r, pts_y=y, vec_pq=v1, vec_qr=b[:, None] * u2)
    return ok, rec


def _margin_causal(K, rec):
    a, b, c = rec["a"], rec["b"], rec["c"]
    P, Q, Rm = triangle_placement(K, a, b, c)
    yb = point_on_side(K, Q[:, None], Rm[:, None], rec["sy"])
    tb = ms._tau(K, np.broadcast_to(P[:, None], yb.shape), yb)
    m = _tau_margin(tb, rec["tau"])
    m[~_size_ok(K, c)] = np.nan
    return m, {"model_tau": tb}


# -- monotonicity -------------------------------------------------------------


def _measure_monotonicity(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    x = base_points(chart, c.take(n))
    bad = ~chart.inside(x)
    past = c.scalar() >= 0.5
    o1 = np.where(past, -1.0, 1.0)
    u1 = timelike_at(chart, x, c.take(n))
    u2 = timelike_at(chart, x, c.take(n))
    A = scaled(chart, c.scalar(), 0.15, 0.3)
    B = scaled(chart, c.scalar(), 0.35, 0.6)
    grid = np.arange(1, GRID + 1) / GRID
    s, t = A[:, None] * grid, B[:, None] * grid
    N = len(x)
    origins = np.repeat(x, 2 * GRID, axis=0)
    vecs = np.concatenate([(o1[:, None] * s)[..., None] * u1[:, None], t[..., None] * u2[:, None]], axis=1)
    pts, _, bad_p = exp_safe(chart, origins, vecs.reshape(-1, n), np.repeat(bad, 2 * GRID))
    bad |= bad_p.reshape(N, -1).any(axis=1)
    pts = pts.reshape(N, 2 * GRID, n)
    al, be = pts[:, :GRID], pts[:, GRID:]
    X = np.broadcast_to(al[:, :, None], (N, GRID, GRID, n)).reshape(-1, n)
    Y = np.broadcast_to(be[:, None, :], (N, GRID, GRID, n)).reshape(-1, n)
    tau = separation(chart, X, Y)[0].reshape(N, GRID, GRID)
    ok = ~bad & np.all(np.isfinite(tau), axis=(1, 2))
    rec = dict(s=s, t=t, tau=np.nan_to_num(tau), past=past.astype(float), pt_x=x,
               vec_alpha=o1[:, None] * u1, vec_beta=u2, pts_alpha=al, pts_beta=be)
    return ok, rec


def theta_grid(K, rec):
    """Signed comparison angles ``theta(s_i, t_j)``; NaN off the sampled relation set."""
    s = rec["s"][:, :, None]
    t = rec["t"][:, None, :]
    tau = rec["tau"]
    s, t = np.broadcast_arrays(s, t)
    past = rec["past"][:, None, None] > 0.5
    with np.errstate(invalid="ignore"):
        th_a = signed_comparison_angle(K, s, tau, t, "p")
        th_b = signed_comparison_angle(K, s, t, tau, "q")
    th = np.where(past, th_b, th_a)
    # defined only where alpha(s) << beta(t)
    return np.where(tau > 1e-8, th, np.nan)


def _margin_monotonicity(K, rec):
    th = theta_grid(K, rec)
    if K < 0:
        th[rec["tau"] >= d_max(K)] = np.nan
    N = th.shape[0]
    ds = (th[:, 1:, :] - th[:, :-1, :]).reshape(N, -1)
    dt = (th[:, :, 1:] - th[:, :, :-1]).reshape(N, -1)
    m = np.concatenate([ds, dt], axis=1)
    ii, jj = np.meshgrid(np.arange(GRID - 1), np.arange(GRID), indexing="ij")
    i2, j2 = np.meshgrid(np.arange(GRID), np.arange(GRID - 1), indexing="ij")
    first = np.concatenate([np.stack([ii, jj], -1).reshape(-1, 2), np.stack([i2, j2], -1).reshape(-1, 2)])
    second = np.concatenate([np.stack([ii + 1, jj], -1).reshape(-1, 2), np.stack([i2, j2 + 1], -1).reshape(-1, 2)])
    cells = np.concatenate([first, second], axis=1)
    extras = {"cells": np.broadcast_to(cells, (N,) + cells.shape), "theta": th}
    return m, extras


# -- angles and hinges --------------------------------------------------------


def _measure_hinge(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    x = base_points(chart, c.take(n))
    bad = ~chart.inside(x)
    past = c.scalar() >= 0.5
    o1 = np.where(past, -1.0, 1.0)
    u1 = timelike_at(chart, x, c.take(n))
    u2 = timelike_at(chart, x, c.take(n))
    la = scaled(chart, c.scalar(), 0.1, 0.3)
    lb = scaled(chart, c.scalar(), 0.35, 0.6)
    ta = o1[:, None] * u1
    ends, _, bad_e = exp_safe(chart, np.concatenate([x, x]),
                              np.concatenate([la[:, None] * ta, lb[:, None] * u2]), np.concatenate([bad, bad]))
    N = len(x)
    bad |= bad_e[:N] | bad_e[N:]
    ya, yb = ends[:N], ends[N:]
    tau = separation(chart, ya, yb)[0]
    ip = inner(chart, x, ta, u2)
    omega = _angle(ip)
    sign = np.where(past, 1.0, -1.0)
    ok = ~bad & np.isfinite(tau) & (tau > MIN_SIDE_FRACTION * R)
    rec = dict(a=la, b=lb, tau=np.nan_to_num(tau), omega=omega, sign=sign, past=past.astype(float),
               pt_x=x, pt_alpha_end=ya, pt_beta_end=yb, vec_alpha=ta, vec_beta=u2)
    return ok, rec


def _margin_angle(K, rec):
    a, b, tau, past = rec["a"], rec["b"], rec["tau"], rec["past"] > 0.5
    with np.errstate(invalid="ignore"):
        th = np.where(past, signed_comparison_angle(K, a, b, tau, "q"),
                      signed_comparison_angle(K, a, tau, b, "p"))
    measured = rec["sign"] * rec["omega"]
    m = th - measured
    m[~_size_ok(K, tau, a + b)] = np.nan
    return m[:, None], {"comparison_angle": th[:, None], "angle": measured[:, None]}


def _margin_hinge(K, rec):
    o1 = np.where(rec["past"] > 0.5, -1.0, 1.0)
    tb = hinge_endpoint_tau(K, rec["omega"], rec["sign"], o1, np.ones_like(o1), rec["a"], rec["b"])
    m = (rec["tau"] - tb) / np.maximum(tb, EPS)
    m[~_size_ok(K, rec["tau"], rec["a"] + rec["b"])] = np.nan
    return m[:, None], {"model_tau": tb[:, None]}


# -- convexity of md(tau) along timelike geodesics ---------------------------


def _measure_convexity(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    mid = base_points(chart, c.take(n))
    bad = ~chart.inside(mid)
    v = timelike_at(chart, mid, c.take(n))
    L = scaled(chart, c.scalar(), 0.2, 0.35)
    E = orthonormal_frame(chart, mid)
    w = 0.3 * R * np.einsum("ni,nij->nj", 2.0 * c.take(n) - 1.0, E)
    p, _, bad = exp_safe(chart, mid, w, bad)
    N = len(mid)
    ts = np.linspace(-1.0, 1.0, CURVE_POINTS)[None, :] * L[:, None]
    curve, _, bad_c = exp_safe(chart, np.repeat(mid, CURVE_POINTS, axis=0),
                               (ts[..., None] * v[:, None]).reshape(-1, n), np.repeat(bad, CURVE_POINTS))
    bad |= bad_c.reshape(N, -1).any(axis=1)
    _, n2, V = separation(chart, np.repeat(p, CURVE_POINTS, axis=0), curve)
    n2 = n2.reshape(N, CURVE_POINTS)
    fut = V[:, chart.future_axis].reshape(N, CURVE_POINTS) > 0
    ok = ~bad & np.all(np.isfinite(n2), axis=1)
    branch = np.where(n2 < 0, np.where(fut, 1.0, -1.0), 0.0)
    curve = curve.reshape(N, CURVE_POINTS, n)[:, 2:-2]
    rec = dict(L=L, t=ts[:, 2:-2], n2=np.nan_to_num(n2), branch=branch, pt_p=p, pt_mid=mid, vec_gamma=v,
               pts_gamma=curve)
    return ok, rec


def _margin_convexity(K, rec):
    n2, br = rec["n2"], rec["branch"]
    with np.errstate(invalid="ignore", over="ignore"):
        f = -n2 * versq(K * n2)
    h = 2.0 * rec["L"][:, None] / (CURVE_POINTS - 1)
    i = np.arange(2, CURVE_POINTS - 2)
    d1 = (f[:, i + 1] - 2.0 * f[:, i] + f[:, i - 1]) / h**2
    d2 = (f[:, i + 2] - 2.0 * f[:, i] + f[:, i - 2]) / (4.0 * h**2)
    d = (4.0 * d1 - d2) / 3.0
    same = (br[:, i] != 0)
    for k in (-2, -1, 1, 2):
        same &= br[:, i + k] == br[:, i]
    if K < 0:
        same &= -n2[:, i] < d_max(K) ** 2
    m = np.where(same, d - K * f[:, i] - 1.0, np.nan)
    return m, {"f": f[:, i], "second_difference": d}


_CHECKS = {
    "triangle": ("triangle", _measure_triangle, _margin_triangle, 3),
    "causal_triangle": ("causal_triangle", _measure_causal, _margin_causal, 4),
    "monotonicity": ("monotonicity", _measure_monotonicity, _margin_monotonicity, 5),
    "angle": ("hinge", _measure_hinge, _margin_angle, 6),
    "hinge": ("hinge", _measure_hinge, _margin_hinge, 6),
    "convexity": ("convexity", _measure_convexity, _margin_convexity, 7),
}
@functools.lru_cache(maxsize=64)
def measure(chart, condition: str, samples: int, seed: int) -> dict:
    """Chart-side measurements for ``condition`` (shared by ``angle`` and ``hinge``)."""
    key, fn, _, stream = _CHECKS[condition]
    cols = 4 * chart.dim + 2 * PAIRS + 8
    return accumulate(fn, chart, samples, seed, stream, cols, key)


def witness_for(rec, extras, i, k):
    """Serialize sample ``i`` (column ``k``) of a measurement record."""
    width = next(iter(extras.values())).shape[1]
    points, tangents, values = {}, {}, {}
    for name, arr in list(rec.items()) + list(extras.items()):
        if name.startswith("pts_"):
            points[name[4:]] = arr[i, k] if arr.shape[1] == width else arr[i]
        elif name.startswith("pt_"):
            points[name[3:]] = arr[i]
        elif name.startswith("vec_"):
            tangents[name[4:]] = arr[i]
        elif arr.ndim >= 2 and arr.shape[1] == width:
            values[name] = arr[i, k]
        else:
            values[name] = arr[i]
    return jsonable({"sample": int(i), "column": int(k), "points": points, "tangents": tangents, "values": values})


def evaluate(margin_below, bound: CurvatureBound):
    """Oriented per-sample margins and the location of the worst one."""
    m = bound.orient(margin_below)
    filled = np.where(np.isnan(m), np.inf, m)
    flat = int(np.argmin(filled))
    i, k = np.unravel_index(flat, m.shape)
    worst = float(filled[i, k])
    return m, worst, int(i), int(k)


def check_condition(chart, bound: CurvatureBound, condition: str, samples: int = 200, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> Verdict:
    """Sample ``samples`` configurations and test one synthetic comparison condition.

    ``worst_margin`` is the smallest oriented margin over all sampled
    configurations; positive means the inequality implied by the bound held.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}; expected one of {CONDITIONS}")
    if samples <= 0:
        raise ValueError("samples must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rec = measure(within_reach(chart, bound.K), condition, int(samples), int(seed))
    margin_below, extras = _CHECKS[condition][2](bound.K, rec)
    m, worst, i, k = evaluate(margin_below, bound)
    if not np.isfinite(worst):
        raise SamplingError(f"no configuration of {condition} could be compared for K = {bound.K}")
    witness = witness_for(rec, {"margin": m, **extras}, i, k)
    return Verdict(condition, bound, int(samples), worst, witness, int(seed), float(tol), margins=m)
