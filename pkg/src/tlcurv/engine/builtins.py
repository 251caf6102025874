"""Built-in spacetimes, all shipped with analytic Christoffel symbols.

Warped charts have the form ``-dt^2 + a(t)^2 phi(x)^2 |dx|^2`` with the
conformally flat slice factor ``phi = 1 / (1 + kappa |x|^2 / 4)`` (slices of
constant curvature ``kappa``; ``phi = 1`` in dimension 2). With
``lambda = log phi``:

    Gamma^0_ij = a a' phi^2 delta_ij
    Gamma^i_0j = (a'/a) delta_ij
    Gamma^i_jk = delta_ij d_k lambda + delta_ik d_j lambda - delta_jk d_i lambda
"""

from __future__ import annotations

import functools
import math
import re
from pathlib import Path

import numpy as np

from tlcurv.engine.chart import ChartError, MetricChart
from tlcurv.engine.flrw import VARIANTS, flrw_scale_factor


def _minkowski_metric(n):
    eta = np.diag([-1.0] + [1.0] * (n - 1))

    def g(x):
        return np.broadcast_to(eta, x.shape[:-1] + (n, n)).copy()

    return g


def minkowski(n: int = 4) -> MetricChart:
    if int(n) != n or n < 2:
        raise ChartError(f"minkowski needs an integer dimension >= 2, got {n}")
    n = int(n)
    return MetricChart(
        name=f"minkowski{n}", dim=n, metric_fn=_minkowski_metric(n),
        christoffel_fn=lambda x: np.zeros(x.shape[:-1] + (n, n, n)),
        convex_radius=1.0, future_axis=0, params={"n": n}, globally_convex=True,
    )


def _warped(name, n, a, ap, kappa, convex_radius, domain_fn=None, params=None):
    """Chart ``-dt^2 + a(t)^2 phi^2 |dx|^2`` with scale factor ``a`` and derivative ``ap``."""
    flat_slice = n == 2 or kappa == 0

    def slice_factor(y):
        if flat_slice:
            return np.ones(y.shape[:-1]), np.zeros(y.shape)
        phi = 1.0 / (1.0 + 0.25 * kappa * np.sum(y * y, axis=-1))
        return phi, -0.5 * kappa * y * phi[..., None]

    def g(x):
        t, y = x[..., 0], x[..., 1:]
        phi, _ = slice_factor(y)
        out = np.zeros(x.shape[:-1] + (n, n))
        out[..., 0, 0] = -1.0
        s = (a(t) * phi) ** 2
        idx = np.arange(1, n)
        out[..., idx, idx] = s[..., None]
        return out

    def gamma(x):
        t, y = x[..., 0], x[..., 1:]
        phi, dlam = slice_factor(y)
        at, apt = a(t), ap(t)
        G = np.zeros(x.shape[:-1] + (n, n, n))
        idx = np.arange(1, n)
        G[..., 0, idx, idx] = (at * apt * phi * phi)[..., None]
        G[..., idx, 0, idx] = (apt / at)[..., None]
        G[..., idx, idx, 0] = (apt / at)[..., None]
        if not flat_slice:
            m = n - 1
            d = np.eye(m)
            # spatial block: d_ij dl_k + d_ik dl_j - d_jk dl_i
            sp = (np.einsum("ij,...k->...ijk", d, dlam) + np.einsum("ik,...j->...ijk", d, dlam)
                  - np.einsum("jk,...i->...ijk", d, dlam))
            G[..., 1:, 1:, 1:] = sp
        return G

    return MetricChart(name=name, dim=n, metric_fn=g, christoffel_fn=gamma, convex_radius=convex_radius,
                       future_axis=0, domain_fn=domain_fn, params=params or {})


def de_sitter_chart(n: int = 2, K: float = 1.0) -> MetricChart:
    """``-dt^2 + cosh^2(sqrt(K) t) dS^2``, slices round of curvature ``K`` (flat line for n = 2)."""
    if not K > 0:
        raise ChartError("de Sitter charts need K > 0")
    if int(n) != n or n < 2:
        raise ChartError("de Sitter charts need an integer dimension >= 2")
    s = math.sqrt(K)
    return _warped(f"de_sitter{int(n)}(K={K:g})", int(n), lambda t: np.cosh(s * t), lambda t: s * np.sinh(s * t),
                   K, convex_radius=1.0 / s, params={"n": int(n), "K": K})


def anti_de_sitter_chart(n: int = 2, K: float = -1.0) -> MetricChart:
    """Static chart ``-cosh^2(k x) dt^2 + dx^2`` with ``k = sqrt(-K)``."""
    if n != 2:
        raise ChartError("only the 2-dimensional anti-de Sitter chart is built in")
    if not K < 0:
        raise ChartError("anti-de Sitter charts need K < 0")
    k = math.sqrt(-K)

    def g(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = -np.cosh(k * x[..., 1]) ** 2
        out[..., 1, 1] = 1.0
        return out

    def gamma(x):
        kx = k * x[..., 1]
        G = np.zeros(x.shape[:-1] + (2, 2, 2))
        G[..., 0, 0, 1] = G[..., 0, 1, 0] = k * np.tanh(kx)
        G[..., 1, 0, 0] = k * np.sinh(kx) * np.cosh(kx)
        return G

    return MetricChart(name=f"anti_de_sitter2(K={K:g})", dim=2, metric_fn=g, christoffel_fn=gamma,
                       convex_radius=1.0 / k, future_axis=0, params={"n": 2, "K": K})


def model_chart(K: float) -> MetricChart:
    """A 2-dimensional chart of ``L2(K)``; :func:`model_embedding` maps it into the model quadric."""
    if K > 0:
        chart = de_sitter_chart(2, K)
    elif K < 0:
        chart = anti_de_sitter_chart(2, K)
    else:
        chart = minkowski(2)
    return MetricChart(name=f"model({K:+g})", dim=2, metric_fn=chart.metric_fn,
                       christoffel_fn=chart.christoffel_fn, convex_radius=chart.convex_radius,
                       future_axis=0, params={"K": K})


def model_embedding(K: float, x) -> np.ndarray:
    """Ambient coordinates in ``L2(K)`` of :func:`model_chart` points ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    t, y = x[..., 0], x[..., 1]
    if K == 0:
        return x.copy()
    s = math.sqrt(abs(K))
    if K > 0:
        c = np.cosh(s * t) / s
        return np.stack([np.sinh(s * t) / s, c * np.cos(s * y), c * np.sin(s * y)], axis=-1)
    c = np.cosh(s * y) / s
    return np.stack([c * np.cos(s * t), c * np.sin(s * t), np.sinh(s * y) / s], axis=-1)


@functools.lru_cache(maxsize=8)
def _scale_factor(variant):
    return flrw_scale_factor(variant, (-0.6, 0.6))


def flrw(variant: str = "fluid_consistent", k: float = -1.0) -> MetricChart:
    """``(-eps, eps) x_f H^3`` with the slices in Poincare-ball coordinates ``|x| < 2``."""
    if variant not in VARIANTS:
        raise ChartError(f"unknown FLRW variant {variant!r}; expected one of {VARIANTS}")
    if k != -1:
        raise ChartError("the FLRW example uses hyperbolic slices, k = -1")
    sf = _scale_factor(variant)
    eps = sf.epsilon()

    def domain(x):
        return (np.abs(x[..., 0]) < eps) & (np.sum(x[..., 1:] ** 2, axis=-1) < 3.0)

    chart = _warped(f"flrw({variant})", 4, sf.f, sf.fp, -1.0, convex_radius=0.8 * eps, domain_fn=domain,
                    params={"variant": variant, "k": -1.0, "epsilon": eps, "scale_factor": sf})
    return chart


_BUILTINS = {
    "minkowski": minkowski,
    "de_sitter": de_sitter_chart,
    "anti_de_sitter": anti_de_sitter_chart,
    "model": model_chart,
    "flrw": flrw,
}


def builtin(name: str, params: dict | None = None) -> MetricChart:
    """Construct a built-in chart by family name and keyword parameters."""
    if name not in _BUILTINS:
        raise ChartError(f"unknown builtin {name!r}; known: {sorted(_BUILTINS)}")
    try:
        return _BUILTINS[name](**(params or {}))
    except TypeError as exc:
        raise ChartError(f"invalid parameters for {name}: {exc}") from None


_SHORT = [
    (re.compile(r"minkowski(\d+)$"), lambda m: ("minkowski", {"n": int(m[1])})),
    (re.compile(r"model([+-]?\d+(?:\.\d*)?)$"), lambda m: ("model", {"K": float(m[1])})),
    (re.compile(r"de_sitter(\d+)$"), lambda m: ("de_sitter", {"n": int(m[1])})),
    (re.compile(r"anti_de_sitter(\d+)$"), lambda m: ("anti_de_sitter", {"n": int(m[1])})),
    (re.compile(r"flrw(?::(\w+))?$"), lambda m: ("flrw", {"variant": m[1] or "fluid_consistent"})),
]


@functools.lru_cache(maxsize=32)
def _resolve_short(spec):
    for pattern, make in _SHORT:
        m = pattern.match(spec)
        if m:
            name, params = make(m)
            return builtin(name, params)
    return None


def resolve(spec: str) -> MetricChart:
    """Chart from a CLI spacetime string: ``minkowski4``, ``model+1``, ``flrw:paper_literal`` or a JSON path."""
    chart = _resolve_short(spec)
    if chart is not None:
        return chart
    if spec.endswith(".json") or Path(spec).exists():
        from tlcurv.engine.dsl import load_chart_file

        return load_chart_file(spec)
    raise ChartError(f"unknown spacetime {spec!r}")
