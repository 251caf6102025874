"""Finite-difference Hessian comparisons for the time separation and md_S.

Second derivatives are taken along geodesics through the query point with
steps ``h`` and ``2h`` and combined by one Richardson step. All stencil points
of a batch are shot in one lockstep solve, which keeps their separations
consistent to roundoff.
"""

from __future__ import annotations

import numpy as np

from tlcurv.engine.chart import inner
from tlcurv.mdfun import CurvatureBound, md_ratio, md_S_of_square
from tlcurv.verifier.conditions import evaluate, witness_for
from tlcurv.verifier.sampling import (
    Columns, accumulate, base_points, exp_safe, orthonormal_frame, scaled, separation, spacelike_orthogonal,
    timelike_at, within_reach,
)
from tlcurv.verifier.verdict import Verdict

STEP = 1e-4
MIN_TAU = 0.05
DEFAULT_TOL = 1e-3
PARTS = ("timelike_tau", "signed_distance_all_v")
_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])


def richardson_second(f_m2, f_m1, f0, f_p1, f_p2, h):
    d1 = (f_p1 - 2.0 * f0 + f_m1) / h**2
    d2 = (f_p2 - 2.0 * f0 + f_m2) / (4.0 * h**2)
    return (4.0 * d1 - d2) / 3.0


def _stencil(chart, q, dirs, bad):
    """Points ``exp_q(k h d)`` for ``k = -2, -1, 1, 2``; ``dirs`` is ``(N, m, n)``."""
    N, m, n = dirs.shape
    vecs = STEP * _OFFSETS[None, None, :, None] * dirs[:, :, None, :]
    origins = np.repeat(q, m * len(_OFFSETS), axis=0)
    pts, _, bad_s = exp_safe(chart, origins, vecs.reshape(-1, n), np.repeat(bad, m * len(_OFFSETS)))
    bad = bad | bad_s.reshape(N, -1).any(axis=1)
    return pts.reshape(N, m, len(_OFFSETS), n), bad


def _second(vals, centre):
    """Richardson second differences from stencil values ``(N, m, 4)`` and centre values ``(N,)``."""
    c = centre[:, None]
    return richardson_second(vals[..., 0], vals[..., 1], c, vals[..., 2], vals[..., 3], STEP)


def _chronological_pair(chart, c):
    n, R = chart.dim, chart.convex_radius
    p = base_points(chart, c.take(n), back=0.3)
    bad = ~chart.inside(p)
    v = timelike_at(chart, p, c.take(n))
    tau0 = np.maximum(scaled(chart, c.scalar(), 0.2, 0.6), MIN_TAU + 0.01 * c.scalar())
    q, vel, bad = exp_safe(chart, p, tau0[:, None] * v, bad)
    T = vel / tau0[:, None]
    return p, q, T, bad


def _measure_tau(chart, u):
    n = chart.dim
    c = Columns(u)
    p, q, T, bad = _chronological_pair(chart, c)
    w = spacelike_orthogonal(chart, q, T, c.take(n - 1))
    pts, bad = _stencil(chart, q, w[:, None, :], bad)
    N = len(p)
    tau_q = separation(chart, p, q)[0]
    tau_s = separation(chart, np.repeat(p, 4, axis=0), pts.reshape(-1, n))[0].reshape(N, 1, 4)
    hess = _second(tau_s, tau_q)[:, 0]
    ok = ~bad & np.isfinite(hess) & np.isfinite(tau_q) & (tau_q >= MIN_TAU)
    rec = dict(tau=np.nan_to_num(tau_q), hess=np.nan_to_num(hess), vv=inner(chart, q, w, w),
               pt_p=p, pt_q=q, vec_v=w, vec_gradient_direction=T)
    return ok, rec


def _margin_tau(K, rec):
    rhs = -md_ratio(K, rec["tau"]) * rec["vv"]
    return (rec["hess"] - rhs)[:, None], {"lhs": rec["hess"][:, None], "rhs": rhs[:, None]}


def _measure_md_s(chart, u):
    n, R = chart.dim, chart.convex_radius
    c = Columns(u)
    p = base_points(chart, c.take(n))
    bad = ~chart.inside(p)
    E = orthonormal_frame(chart, p)
    z = scaled(chart, c.scalar(), 0.2, 0.5)[:, None] * np.einsum("ni,nij->nj", 2.0 * c.take(n) - 1.0, E)
    q, _, bad = exp_safe(chart, p, z, bad)
    v = timelike_at(chart, q, c.take(n))
    pts, bad = _stencil(chart, q, v[:, None, :], bad)
    N = len(p)
    _, n2_q, _ = separation(chart, p, q)
    _, n2_s, _ = separation(chart, np.repeat(p, 4, axis=0), pts.reshape(-1, n))
    ok = ~bad & np.isfinite(n2_q) & np.all(np.isfinite(n2_s.reshape(N, 4)), axis=1) & (np.abs(n2_q) >= MIN_TAU**2)
    rec = dict(n2=np.nan_to_num(n2_q), n2_stencil=np.nan_to_num(n2_s.reshape(N, 4)), vv=inner(chart, q, v, v),
               pt_p=p, pt_q=q, vec_v=v)
    return ok, rec


def _margin_md_s(K, rec):
    F0 = md_S_of_square(K, rec["n2"])
    Fs = md_S_of_square(K, rec["n2_stencil"])[:, None, :]
    lhs = _second(Fs, F0)[:, 0]
    rhs = (1.0 - K * F0) * rec["vv"]
    return (rhs - lhs)[:, None], {"lhs": lhs[:, None], "rhs": rhs[:, None]}


def _measure_box(chart, u):
    n = chart.dim
    c = Columns(u)
    p, q, T, bad = _chronological_pair(chart, c)
    # orthonormal basis at q adapted to T
    E = orthonormal_frame(chart, q)
    basis = [T]
    for i in range(1, n):
        e = E[:, i, :].copy()
        for b in basis:
            e = e - (inner(chart, q, e, b) / inner(chart, q, b, b))[:, None] * b
        basis.append(e / np.sqrt(np.abs(inner(chart, q, e, e)))[:, None])
    dirs = np.stack(basis, axis=1)
    pts, bad = _stencil(chart, q, dirs, bad)
    N = len(p)
    tau_q = separation(chart, p, q)[0]
    tau_s = separation(chart, np.repeat(p, 4 * n, axis=0), pts.reshape(-1, n))[0].reshape(N, n, 4)
    hess = _second(tau_s, tau_q)
    eps = np.array([-1.0] + [1.0] * (n - 1))
    box = hess @ eps
    ok = ~bad & np.isfinite(box) & np.isfinite(tau_q) & (tau_q >= MIN_TAU)
    rec = dict(tau=np.nan_to_num(tau_q), box=np.nan_to_num(box), hess_diag=np.nan_to_num(hess),
               pt_p=p, pt_q=q, vec_frame=dirs)
    return ok, rec


def _margin_box(K, rec):
    n = rec["hess_diag"].shape[1]
    rhs = -(n - 1) * md_ratio(K, rec["tau"])
    return (rec["box"] - rhs)[:, None], {"lhs": rec["box"][:, None], "rhs": rhs[:, None]}


_PARTS = {
    "timelike_tau": (_measure_tau, _margin_tau, 11),
    "signed_distance_all_v": (_measure_md_s, _margin_md_s, 12),
    "dalembert": (_measure_box, _margin_box, 13),
}


def _run(chart, bound, part, condition, samples, seed, tol):
    if samples <= 0:
        raise ValueError("samples must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    measure_fn, margin_fn, stream = _PARTS[part]
    chart = within_reach(chart, bound.K)
    rec = accumulate(measure_fn, chart, int(samples), int(seed), stream, 4 * chart.dim + 4, part)
    margin_below, extras = margin_fn(bound.K, rec)
    m, worst, i, k = evaluate(margin_below, bound)
    witness = witness_for(rec, {"margin": m, **extras}, i, k)
    witness["part"] = part
    return Verdict(condition, bound, int(samples), worst, witness, int(seed), float(tol), margins=m)


def hessian_check(chart, bound: CurvatureBound, part: str = "timelike_tau", samples: int = 200, seed: int = 0,
                  tol: float = DEFAULT_TOL) -> Verdict:
    """Finite-difference Hessian of ``tau(p, .)`` or of ``md_S`` of the signed distance against its model value.

    ``timelike_tau`` tests level-set directions ``v`` at ``q >> p``;
    ``signed_distance_all_v`` tests timelike ``v`` at arbitrary nearby ``q``.
    """
    if part not in PARTS:
        raise ValueError(f"unknown Hessian part {part!r}; expected one of {PARTS}")
    return _run(chart, bound, part, "hessian", samples, seed, tol)


def dalembert_check(chart, bound: CurvatureBound, samples: int = 200, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> Verdict:
    """Metric trace of the FD Hessian of ``tau(p, .)`` against ``-(n - 1)`` times the md ratio."""
    return _run(chart, bound, "dalembert", "dalembert", samples, seed, tol)
