"""Geodesics in a chart: integration, exponential map, shooting logarithm, Jacobi fields.

The batched functions take stacks of points ``(N, n)`` and are what the
verifier uses; the single-configuration wrappers validate and raise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from tlcurv.engine.chart import (
    ChartError, MetricChart, _points, christoffel, inner, riemann,
)
from tlcurv.engine.integrate import Trajectory, dopri45

DEFAULT_TOL = 1e-10
SEGMENT_TOL = 1e-12  # single trajectories are cheap; keeps dense output within 1e-9
SHOOT_TOL = 1e-10
SHOOT_MAX_ITER = 50
CAUSAL_TOL = 1e-12


class ShootingError(RuntimeError):
    pass


def _geodesic_rhs(chart):
    n = chart.dim

    def f(t, y):
        x, u = y[:, :n], y[:, n:]
        G = christoffel(chart, x)
        acc = -np.einsum("nkij,ni,nj->nk", G, u, u)
        return np.concatenate([u, acc], axis=1)

    return f


def _inside_state(chart):
    n = chart.dim
    return lambda y: chart.inside(y[:, :n])


def shoot(chart: MetricChart, X, V, t_end=1.0, tol=DEFAULT_TOL, dense=False) -> Trajectory:
    """Integrate the geodesic equation for a batch of initial data ``(X, V)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    X, V = np.broadcast_arrays(X, V)
    y0 = np.concatenate([X, V], axis=1)
    return dopri45(_geodesic_rhs(chart), y0, t_end, tol=tol, inside=_inside_state(chart), dense=dense)


def exp_batch(chart, X, V, tol=DEFAULT_TOL):
    """``(points, velocities, exited)`` at parameter 1 for a batch."""
    tr = shoot(chart, X, V, 1.0, tol)
    n = chart.dim
    return tr.y_end[:, :n], tr.y_end[:, n:], tr.exited


@dataclass(frozen=True, eq=False)
class GeodesicSegment:
    """A geodesic ``t -> gamma(t)``, ``t in [0, t_end]``, with initial data ``(x0, v0)``.

    ``parametrization`` is ``tau_arclength`` when ``v0`` is unit timelike.
    """

    chart: MetricChart
    x0: np.ndarray
    v0: np.ndarray
    t_end: float
    character: Literal["timelike", "null", "spacelike"]
    parametrization: Literal["affine", "tau_arclength"]
    trajectory: Trajectory
    exited: bool

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        y = self.trajectory(t)[0]
        n = self.chart.dim
        return y[:n], y[n:]

    def point(self, t: float) -> np.ndarray:
        return self.state(t)[0]

    def velocity(self, t: float) -> np.ndarray:
        return self.state(t)[1]


def causal_character(norm2: float, scale: float) -> str:
    if abs(norm2) <= CAUSAL_TOL * max(scale, 1e-300):
        return "null"
    return "timelike" if norm2 < 0 else "spacelike"


def integrate_geodesic(chart: MetricChart, x, v, t_end: float, tol: float = SEGMENT_TOL) -> GeodesicSegment:
    """Adaptive Dormand-Prince solution of ``x'' + Gamma(x', x') = 0``.

    Leaving the chart domain is reported through ``exited`` and stops the
    segment at the last inside point.
    """
    x = _points(chart, x)
    v = np.asarray(v, dtype=float)
    if not chart.inside(x):
        raise ChartError(f"initial point outside the domain of {chart.name}")
    tr = shoot(chart, x, v, t_end, tol, dense=True)
    n2 = float(inner(chart, x, v, v))
    char = causal_character(n2, float(v @ v))
    param = "tau_arclength" if char == "timelike" and abs(n2 + 1) <= 1e-12 else "affine"
    return GeodesicSegment(chart, x.copy(), v.copy(), float(t_end), char, param, tr, bool(tr.exited[0]))


def exp_map(chart: MetricChart, x, v, tol: float = DEFAULT_TOL) -> np.ndarray:
    x = _points(chart, x)
    if not chart.inside(x):
        raise ChartError(f"point outside the domain of {chart.name}")
    y, _, exited = exp_batch(chart, x, v, tol)
    if exited[0]:
        raise ChartError(f"geodesic leaves the domain of {chart.name} before t = 1")
    return y[0]


def _initial_guess(chart, X, Q):
    d = Q - X
    G = christoffel(chart, X)
    return d + 0.5 * np.einsum("nkij,ni,nj->nk", G, d, d)


def _solve(J, r):
    try:
        return np.linalg.solve(J, r[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.stack([np.linalg.lstsq(a, b, rcond=None)[0] for a, b in zip(J, r)])


def log_batch(chart: MetricChart, X, Q, tol=1e-12, max_iter=SHOOT_MAX_ITER, strict=True, polish=True):
    """Newton shooting for ``V`` with ``exp_X(V) = Q``; returns ``(V, converged)``.

    The Jacobian is a central difference over ``2n`` neighbouring shots that
    are integrated in the same batch as the main shot. Members keep iterating
    after the ``1e-10`` residual test until the Newton step is at roundoff
    level, so neighbouring logs used in finite-difference stencils are
    consistent to near machine precision. With ``polish`` a last joint
    Newton step is taken for all converged members in a single batch, which
    removes the dependence on which iteration each member finished in.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    X, Q = (np.ascontiguousarray(a) for a in np.broadcast_arrays(X, Q))
    N, n = X.shape
    V = _initial_guess(chart, X, Q)
    qscale = 1.0 + np.max(np.abs(Q), axis=1)
    active = np.ones(N, dtype=bool)
    converged = np.zeros(N, dtype=bool)
    best = np.full(N, np.inf)
    eye = np.eye(n)
    polished = False
    for it in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            if polished or not polish or not converged.any():
                break
            # one joint Newton step for every converged member, so all of them
            # see the same integrator step sequence
            idx = np.flatnonzero(converged)
            polished = True
        elif it == max_iter:
            break
        Xa, Va = X[idx], V[idx]
        h = 1e-6 * np.maximum(1.0, np.max(np.abs(Va), axis=1))
        shifts = np.concatenate([np.zeros((1, n)), eye, -eye])  # (2n+1, n)
        Vs = Va[None, :, :] + shifts[:, None, :] * h[None, :, None]
        Xs = np.broadcast_to(Xa, Vs.shape)
        Y, _, exited = exp_batch(chart, Xs.reshape(-1, n), Vs.reshape(-1, n), tol)
        Y = Y.reshape(2 * n + 1, idx.size, n)
        exited = exited.reshape(2 * n + 1, idx.size).any(axis=0)
        res = Y[0] - Q[idx]
        rnorm = np.max(np.abs(res), axis=1) / qscale[idx]
        J = (Y[1 : n + 1] - Y[n + 1 :]) / (2 * h[None, :, None])  # (n, N, n): d Y / d V_m
        J = np.transpose(J, (1, 2, 0))
        step = -_solve(J, res)
        ok = rnorm <= SHOOT_TOL
        small = np.max(np.abs(step), axis=1) <= 1e-13 * np.maximum(1.0, np.max(np.abs(Va), axis=1))
        stalled = ok & (rnorm >= 0.5 * best[idx])
        best[idx] = np.minimum(best[idx], rnorm)
        finished = ok & (small | stalled)
        if polished:
            good = ok & np.all(np.isfinite(step), axis=1) & ~exited
            V[idx[good]] = Va[good] + step[good]
            converged[idx[~good]] = False
            break
        converged[idx[ok]] = True
        bad = exited | ~np.all(np.isfinite(step), axis=1)
        upd = ~finished & ~bad
        V[idx[upd]] = Va[upd] + step[upd]
        active[idx[finished | bad]] = False
    if strict and not converged.all():
        raise ShootingError(f"shooting did not converge for {int((~converged).sum())} of {N} targets")
    return V, converged


def log_map(chart: MetricChart, x, q, tol: float = 1e-12) -> np.ndarray:
    """Initial velocity of the geodesic from ``x`` reaching ``q`` at parameter 1."""
    x = _points(chart, x)
    q = _points(chart, q)
    if not (chart.inside(x) and chart.inside(q)):
        raise ChartError(f"point outside the domain of {chart.name}")
    d = q - x
    if not chart.globally_convex and np.linalg.norm(d) > 2.0 * chart.convex_radius:
        raise ChartError("target lies outside the declared convex radius")
    V, _ = log_batch(chart, x, q, tol)
    return V[0]


def separation_batch(chart, X, Q, tol=1e-12, strict=True):
    """``(tau, norm2, V)``: local time separation, ``<V,V>`` and the log vectors."""
    V, conv = log_batch(chart, X, Q, tol, strict=strict)
    X = np.broadcast_to(np.atleast_2d(X), V.shape)
    n2 = inner(chart, X, V, V)
    scale = np.einsum("ni,ni->n", V, V)
    timelike = n2 < -CAUSAL_TOL * scale
    future = V[:, chart.future_axis] > 0
    tau = np.where(timelike & future, np.sqrt(np.abs(n2)), 0.0)
    tau = np.where(conv, tau, np.nan)
    return tau, n2, V


def local_tau(chart: MetricChart, p, q) -> float:
    """Time separation inside a convex neighbourhood (0 unless ``q`` is in the timelike future of ``p``)."""
    log_map(chart, p, q)  # validation
    tau, _, _ = separation_batch(chart, p, q)
    return float(tau[0])


def signed_distance(chart: MetricChart, p, q) -> float:
    """``-tau`` for chronologically related pairs (either order), ``+|v|`` for spacelike, 0 for null."""
    v = log_map(chart, p, q)
    n2 = float(inner(chart, p, v, v))
    if causal_character(n2, float(v @ v)) == "null":
        return 0.0
    return -float(np.sqrt(-n2)) if n2 < 0 else float(np.sqrt(n2))


def _jacobi_rhs(chart):
    n = chart.dim

    def f(t, y):
        x, u, J, P = y[:, :n], y[:, n : 2 * n], y[:, 2 * n : 3 * n], y[:, 3 * n :]
        G = christoffel(chart, x)
        R = riemann(chart, x)
        acc = -np.einsum("nkij,ni,nj->nk", G, u, u)
        # J' = DJ - Gamma(u, J);  (DJ)' = -R(J, u)u - Gamma(u, DJ)
        dJ = P - np.einsum("nkij,ni,nj->nk", G, u, J)
        dP = -np.einsum("nabcd,nb,nc,nd->na", R, u, J, u) - np.einsum("nkij,ni,nj->nk", G, u, P)
        return np.concatenate([u, acc, dJ, dP], axis=1)

    return f


def jacobi_batch(chart, X, V, J0, DJ0, t_end, tol=DEFAULT_TOL, dense=False) -> Trajectory:
    """Batched Jacobi transport; state layout ``(x, x', J, DJ/dt)``."""
    arrays = [np.atleast_2d(np.asarray(a, dtype=float)) for a in (X, V, J0, DJ0)]
    y0 = np.concatenate(np.broadcast_arrays(*arrays), axis=1)
    n = chart.dim
    return dopri45(_jacobi_rhs(chart), y0, t_end, tol=tol, inside=lambda y: chart.inside(y[:, :n]), dense=dense)


def jacobi_transport(chart: MetricChart, gamma: GeodesicSegment, J0, DJ0, t: float,
                     tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Solution of ``J'' + R(J, gamma')gamma' = 0`` at parameter ``t``: ``(J(t), J'(t))``.

    ``J'`` is the covariant derivative along ``gamma``.
    """
    if not -1e-14 <= t <= gamma.t_end + 1e-14:
        raise ValueError(f"t = {t} outside the integrated interval of the geodesic")
    tr = jacobi_batch(chart, gamma.x0, gamma.v0, J0, DJ0, t, tol)
    if tr.exited[0]:
        raise ChartError("geodesic leaves the chart domain")
    n = chart.dim
    y = tr.y_end[0]
    return y[2 * n : 3 * n], y[3 * n :]


__all__ = [
    "GeodesicSegment", "ShootingError", "integrate_geodesic", "exp_map", "log_map", "local_tau",
    "signed_distance", "jacobi_transport", "shoot", "exp_batch", "log_batch", "separation_batch",
    "jacobi_batch", "causal_character",
]
