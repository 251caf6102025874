"""Metric charts and the Levi-Civita curvature machinery.

Index conventions, all arrays broadcast over leading axes:

* ``christoffel(chart, x)[..., k, i, j]`` is ``Gamma^k_ij``.
* ``riemann(chart, x)[..., a, b, c, d]`` is ``R^a_bcd`` with
  ``R(X, Y)Z = R^a_bcd Z^b X^c Y^d``, i.e. ``R(X,Y)Z = nabla_X nabla_Y Z -
  nabla_Y nabla_X Z - nabla_[X,Y] Z``.
* sectional curvature of ``span(v, w)`` is ``<R(w,v)v, w> / (<v,v><w,w> - <v,w>^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FD_REL_STEP = 1e-5
FD_ABS_FLOOR = 1e-7
# second metric derivatives (charts without analytic Christoffels) need a wider stencil
FD2_STEP = 1e-4
DEGENERATE_PLANE_TOL = 1e-10


class ChartError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricChart:
    """A coordinate chart of a spacetime.

    ``metric_fn`` maps points ``(..., n)`` to Gram matrices ``(..., n, n)``;
    ``christoffel_fn`` (optional) maps points to ``(..., n, n, n)``.
    ``domain_fn`` returns a boolean mask; ``None`` means all of ``R^n``.
    Configurations sampled by the verifier stay within ``convex_radius`` of
    ``center``. ``globally_convex`` charts (Minkowski) skip the radius guard
    in :func:`log_map`; the radius then only sets the sampling scale.
    """

    name: str
    dim: int
    metric_fn: Callable
    christoffel_fn: Callable | None = None
    convex_radius: float = 1.0
    future_axis: int = 0
    domain_fn: Callable | None = None
    center: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    globally_convex: bool = False

    def __post_init__(self):
        if self.dim < 2:
            raise ChartError("charts need dimension >= 2")
        if not 0 <= self.future_axis < self.dim:
            raise ChartError(f"future_axis {self.future_axis} out of range")
        if not self.convex_radius > 0:
            raise ChartError("convex_radius must be positive")
        c = np.zeros(self.dim) if self.center is None else np.array(self.center, dtype=float)
        if c.shape != (self.dim,):
            raise ChartError("center has the wrong dimension")
        object.__setattr__(self, "center", c)

    def __repr__(self):
        return f"MetricChart({self.name!r}, dim={self.dim})"

    def inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if self.domain_fn is not None:
            ok &= np.asarray(self.domain_fn(x), dtype=bool)
        return ok


def _points(chart, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != chart.dim:
        raise ChartError(f"{chart.name} points need {chart.dim} coordinates, got shape {x.shape}")
    return x


def _require_inside(chart, x):
    if not np.all(chart.inside(x)):
        raise ChartError(f"point outside the domain of {chart.name}")


def metric(chart: MetricChart, x) -> np.ndarray:
    x = _points(chart, x)
    return np.asarray(chart.metric_fn(x), dtype=float)


def inner(chart, x, u, v) -> np.ndarray:
    g = metric(chart, x)
    return np.einsum("...i,...ij,...j->...", np.asarray(u, float), g, np.asarray(v, float))


def _steps(x):
    return np.maximum(FD_REL_STEP * np.abs(x), FD_ABS_FLOOR)


def _central(fn, x, steps):
    """Stack of central differences ``d fn / d x_m`` along a new axis after the batch axes."""
    n = x.shape[-1]
    out = []
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        h = steps[..., m : m + 1]
        fp = fn(x + h * e)
        fm = fn(x - h * e)
        hb = h.reshape(h.shape + (1,) * (fp.ndim - h.ndim))
        out.append((fp - fm) / (2.0 * hb))
    return np.stack(out, axis=x.ndim - 1)


def metric_derivative(chart, x) -> np.ndarray:
    """``dg[..., m, i, j] = d_m g_ij`` by central differences."""
    x = _points(chart, x)
    return _central(lambda y: metric(chart, y), x, _steps(x))


def _christoffel_from(g, dg):
    ginv = np.linalg.inv(g)
    # Gamma_lij = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    return np.einsum("...kl,...lij->...kij", ginv, low)


def christoffel_fd(chart: MetricChart, x) -> np.ndarray:
    x = _points(chart, x)
    g = metric(chart, x)
    if np.any(np.abs(np.linalg.det(g)) < 1e-300):
        raise ChartError("singular metric matrix")
    return _christoffel_from(g, metric_derivative(chart, x))


def christoffel(chart: MetricChart, x, analytic: bool = True) -> np.ndarray:
    """Christoffel symbols; analytic when the chart ships them, else finite differences."""
    x = _points(chart, x)
    if analytic and chart.christoffel_fn is not None:
        return np.asarray(chart.christoffel_fn(x), dtype=float)
    return christoffel_fd(chart, x)


def _dchristoffel(chart, x):
    """``(Gamma, dGamma)`` with ``dGamma[..., m, k, i, j] = d_m Gamma^k_ij``."""
    if chart.christoffel_fn is not None:
        G = christoffel(chart, x)
        return G, _central(lambda y: christoffel(chart, y), x, _steps(x))
    # Metric-only charts: first and second metric derivatives on a wider stencil.
    n = chart.dim
    h = FD2_STEP * np.maximum(np.abs(x), 1.0)
    g = metric(chart, x)
    eye = np.eye(n)
    shifted = {}

    def g_at(i, si, j, sj):
        key = (i, si, j, sj)
        if key not in shifted:
            y = x.copy()
            if si:
                y = y + si * h[..., i : i + 1] * eye[i]
            if sj:
                y = y + sj * h[..., j : j + 1] * eye[j]
            shifted[key] = metric(chart, y)
        return shifted[key]

    hh = h[..., :, None, None]
    dg = np.stack([(g_at(m, 1, 0, 0) - g_at(m, -1, 0, 0)) / (2 * hh[..., m, :, :]) for m in range(n)], axis=-3)
    ddg = np.empty(x.shape[:-1] + (n, n, n, n))
    for a in range(n):
        for b in range(a, n):
            if a == b:
                val = (g_at(a, 1, 0, 0) - 2 * g + g_at(a, -1, 0, 0)) / hh[..., a, :, :] ** 2
            else:
                val = (g_at(a, 1, b, 1) - g_at(a, 1, b, -1) - g_at(a, -1, b, 1) + g_at(a, -1, b, -1)) / (
                    4 * hh[..., a, :, :] * hh[..., b, :, :])
            ddg[..., a, b, :, :] = val
            ddg[..., b, a, :, :] = val
    ginv = np.linalg.inv(g)
    low = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    G = np.einsum("...kl,...lij->...kij", ginv, low)
    # d_m Gamma_lij from second derivatives, d_m g^kl = -g^ka d_m g_ab g^bl
    dlow = 0.5 * (np.einsum("...mjli->...mlij", ddg) + np.einsum("...milj->...mlij", ddg)
                  - np.einsum("...mlij->...mlij", ddg))
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    dG = np.einsum("...mkl,...lij->...mkij", dginv, low) + np.einsum("...kl,...mlij->...mkij", ginv, dlow)
    return G, dG


def riemann(chart: MetricChart, x) -> np.ndarray:
    """``R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb``."""
    x = _points(chart, x)
    G, dG = _dchristoffel(chart, x)
    return (
        np.einsum("...cadb->...abcd", dG)
        - np.einsum("...dacb->...abcd", dG)
        + np.einsum("...ace,...edb->...abcd", G, G)
        - np.einsum("...ade,...ecb->...abcd", G, G)
    )


def riemann_lowered(chart, x) -> np.ndarray:
    """``R_abcd = g_ae R^e_bcd``."""
    return np.einsum("...ae,...ebcd->...abcd", metric(chart, x), riemann(chart, x))


def sectional_curvature(chart: MetricChart, x, v, w, R=None) -> np.ndarray:
    """Sectional curvature of ``span(v, w)``; ``R`` may pass a precomputed lowered tensor."""
    x = _points(chart, x)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    g = metric(chart, x)
    gvv = np.einsum("...i,...ij,...j->...", v, g, v)
    gww = np.einsum("...i,...ij,...j->...", w, g, w)
    gvw = np.einsum("...i,...ij,...j->...", v, g, w)
    den = gvv * gww - gvw**2
    scale = np.einsum("...i,...i->...", v, v) * np.einsum("...i,...i->...", w, w)
    if np.any(np.abs(den) <= DEGENERATE_PLANE_TOL * np.maximum(scale, 1e-300)):
        raise ChartError("degenerate plane: Gram determinant vanishes")
    if R is None:
        R = riemann_lowered(chart, x)
    num = np.einsum("...abcd,...a,...b,...c,...d->...", R, w, v, w, v)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def ricci_tensor(chart, x, Riem=None) -> np.ndarray:
    """``Ric_bd = R^a_bad``."""
    if Riem is None:
        Riem = riemann(chart, x)
    return np.einsum("...abad->...bd", Riem)


def ricci(chart: MetricChart, x, v, w=None):
    """``Ric(v, w)``, with ``w = v`` by default."""
    w = v if w is None else w
    out = np.einsum("...bd,...b,...d->...", ricci_tensor(chart, x), np.asarray(v, float), np.asarray(w, float))
    return float(out) if np.ndim(out) == 0 else out


def einstein_tensor(chart, x) -> np.ndarray:
    g = metric(chart, x)
    ric = ricci_tensor(chart, x)
    scal = np.einsum("...bd,...bd->...", np.linalg.inv(g), ric)
    return ric - 0.5 * scal[..., None, None] * g


def orthonormal_frame(chart: MetricChart, x) -> np.ndarray:
    """Frames ``E[..., i, :]``: ``E[..., 0, :]`` future unit timelike, the rest unit spacelike.

    Raises for metrics that are not of signature ``(-,+,...,+)``.
    """
    g = metric(chart, x)
    lam, vecs = np.linalg.eigh(g)
    neg = lam < 0
    if not np.all(neg.sum(axis=-1) == 1) or np.any(np.abs(lam) < 1e-300):
        raise ChartError(f"metric of {chart.name} is not Lorentzian at some point")
    # eigh sorts ascending, so the single negative eigenvalue comes first
    E = np.swapaxes(vecs, -1, -2) / np.sqrt(np.abs(lam))[..., None]
    flip = np.where(E[..., 0, chart.future_axis] < 0, -1.0, 1.0)
    E[..., 0, :] *= flip[..., None]
    return E


def check_signature(chart, x, tol=1e-12) -> None:
    g = metric(chart, x)
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > tol * max(1.0, float(np.max(np.abs(g)))):
        raise ChartError(f"metric of {chart.name} is not symmetric")
    orthonormal_frame(chart, x)


def random_unit_timelike(chart, x, rng_u, max_rapidity=1.0, E=None):
    """Future unit timelike vectors at ``x`` from uniform variates ``rng_u[..., n]``.

    The boost rapidity is ``max_rapidity * u0`` in a direction drawn from the rest.
    """
    x = np.asarray(x, dtype=float)
    n = chart.dim
    if E is None:
        E = orthonormal_frame(chart, x)
    eta = max_rapidity * rng_u[..., 0]
    d = _sphere(rng_u[..., 1:n], n - 1)
    comps = np.concatenate([np.cosh(eta)[..., None], np.sinh(eta)[..., None] * d], axis=-1)
    return np.einsum("...i,...ij->...j", comps, E), comps


def _sphere(u, k):
    """Unit vectors in ``R^k`` from uniform variates ``u[..., k]`` (Box-Muller-free)."""
    if k == 1:
        return np.where(u[..., :1] < 0.5, -1.0, 1.0)
    from scipy.special import ndtri

    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def unit_orthogonal_spacelike(chart, x, v, rng_u, E=None):
    """Unit spacelike vectors orthogonal to unit timelike ``v``, direction from ``rng_u[..., n-1]``."""
    n = chart.dim
    if E is None:
        E = orthonormal_frame(chart, x)
    g = metric(chart, x)
    m = np.einsum("...i,...ij->...j", _sphere(rng_u, n - 1), E[..., 1:, :])
    gmv = np.einsum("...i,...ij,...j->...", m, g, v)
    gvv = np.einsum("...i,...ij,...j->...", v, g, v)
    w = m - (gmv / gvv)[..., None] * v
    norm = np.sqrt(np.einsum("...i,...ij,...j->...", w, g, w))
    return w / norm[..., None]


def gram_det(chart, x, v, w):
    g = metric(chart, x)
    a = np.einsum("...i,...ij,...j->...", v, g, v)
    b = np.einsum("...i,...ij,...j->...", w, g, w)
    c = np.einsum("...i,...ij,...j->...", v, g, w)
    return a * b - c * c


__all__ = [
    "ChartError", "MetricChart", "metric", "inner", "metric_derivative", "christoffel",
    "christoffel_fd", "riemann", "riemann_lowered", "sectional_curvature", "ricci",
    "ricci_tensor", "einstein_tensor", "orthonormal_frame", "check_signature",
    "random_unit_timelike", "unit_orthogonal_spacelike", "gram_det",
]
