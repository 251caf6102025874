"""Exact geometry of the Lorentzian model planes ``L2(K)``.

Embeddings
----------
* ``K = 0``: the Minkowski plane, coordinates ``(t, x)``, metric ``diag(-1, 1)``.
* ``K > 0``: de Sitter type, ``<x, x> = 1/K`` in ``R^3`` with ``diag(-1, 1, 1)``.
* ``K < 0``: anti-de Sitter type, ``<x, x> = 1/K`` in ``R^3`` with ``diag(-1, -1, 1)``.

Geodesics are ``exp_p(v) = cosq(K<v,v>) p + sincq(K<v,v>) v`` (see
:mod:`tlcurv._trig`), one formula for all three cases. The inverse uses the
chord ``q - p`` so nearby and nearly null pairs keep full precision.

Points are confined to a convex region: the whole plane for ``K = 0``, the half
space ``x1 > 0`` for ``K > 0`` and the strip ``x0 > 0`` (ambient angle within
``pi/2`` of ``(1, 0, 0)``) for ``K < 0``.

Time orientation is increasing ``x0`` for ``K >= 0`` and increasing ambient
angle ``atan2(x1, x0)`` for ``K < 0``.

The underscore functions work on stacked arrays ``(..., dim)`` and are what the
verifier uses; the public functions take :class:`ModelPoint` and
:class:`ModelTangent` values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from tlcurv._trig import arc_versq, cosq, sincq

QUADRIC_TOL = 1e-12


class ModelGeometryError(ValueError):
    """Raised for points or tangents outside the supported model region."""


class Relation(enum.Enum):
    CHRONOLOGICAL_FUTURE = "chronological_future"
    CHRONOLOGICAL_PAST = "chronological_past"
    SPACELIKE_SEPARATED = "spacelike_separated"
    NULL_RELATED = "null_related"
    EQUAL = "equal"


def ambient_metric(K: float) -> np.ndarray:
    if K == 0:
        return np.diag([-1.0, 1.0])
    if K > 0:
        return np.diag([-1.0, 1.0, 1.0])
    return np.diag([-1.0, -1.0, 1.0])


def _signs(K):
    return np.diag(ambient_metric(K))


def _dot(K, a, b):
    return np.sum(_signs(K) * np.asarray(a) * np.asarray(b), axis=-1)


# -- vectorized primitives ---------------------------------------------------


def _exp(K, p, v):
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    z = K * _dot(K, v, v)
    return cosq(z)[..., None] * p + sincq(z)[..., None] * v


def _log(K, p, q):
    """Return ``(v, <v, v>)`` with ``exp_p(v) = q``; ``<v,v>`` is NaN where no geodesic exists."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    if K == 0:
        return d, _dot(K, d, d)
    u = 0.5 * K * _dot(K, d, d)
    z = arc_versq(u)
    v = (q - (1.0 - u)[..., None] * p) / sincq(z)[..., None]
    n2 = np.where(u < 2.0, z / K, np.nan)
    return v, n2


def _future(K, p, v):
    """Time orientation test for causal ``v`` at ``p`` (True = future)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if K >= 0:
        return v[..., 0] > 0
    return p[..., 0] * v[..., 1] - p[..., 1] * v[..., 0] > 0


def _tau(K, p, q):
    """Vectorized time separation (0 for non-chronological pairs)."""
    v, n2 = _log(K, p, q)
    ok = (n2 < 0) & _future(K, p, v)
    return np.where(ok, np.sqrt(np.abs(np.nan_to_num(n2))), 0.0)


_REGION_TOL = 1e-12


def _in_region(K, p):
    p = np.asarray(p, dtype=float)
    if K == 0:
        return np.ones(p.shape[:-1], dtype=bool)
    # closed region: the boundary antipodal-quarter points are legitimate endpoints
    if K > 0:
        return p[..., 1] > -_REGION_TOL
    return p[..., 0] > -_REGION_TOL


def _base(K):
    if K == 0:
        return np.array([0.0, 0.0])
    s = 1.0 / math.sqrt(abs(K))
    return np.array([0.0, s, 0.0]) if K > 0 else np.array([s, 0.0, 0.0])


def base_frame(K: float) -> tuple[np.ndarray, np.ndarray]:
    """Future unit timelike and unit spacelike vectors at :func:`basepoint`."""
    if K == 0:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    if K > 0:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
    return np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])


def _frame_at(K, p):
    """Future unit timelike ``e_t`` and unit spacelike ``e_x`` at points ``p`` of the ``x_last = 0`` axis."""
    p = np.asarray(p, dtype=float)
    e_t0, e_x = base_frame(K)
    if K <= 0:
        if K == 0:
            return np.broadcast_to(e_t0, p.shape).copy(), np.broadcast_to(e_x, p.shape).copy()
        s = math.sqrt(-K)
        e_t = np.stack([-p[..., 1], p[..., 0], np.zeros(p.shape[:-1])], axis=-1) * s
    else:
        s = math.sqrt(K)
        e_t = np.stack([p[..., 1], p[..., 0], np.zeros(p.shape[:-1])], axis=-1) * s
    return e_t, np.broadcast_to(e_x, p.shape).copy()


# -- public value types ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelPoint:
    K: float
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        dim = 2 if self.K == 0 else 3
        if c.shape != (dim,):
            raise ModelGeometryError(f"L2({self.K}) points need {dim} coordinates, got {c.shape}")
        if self.K != 0:
            err = abs(self.K * float(_dot(self.K, c, c)) - 1.0)
            if err > QUADRIC_TOL * max(1.0, abs(self.K) * float(c @ c)):
                raise ModelGeometryError(f"point {c} is off the quadric <x,x> = 1/K (error {err:.2e})")

    def __repr__(self):
        return f"ModelPoint(K={self.K}, coords={self.coords.tolist()})"


@dataclass(frozen=True, eq=False)
class ModelTangent:
    base: ModelPoint
    vec: np.ndarray

    def __post_init__(self):
        v = np.array(self.vec, dtype=float)
        object.__setattr__(self, "vec", v)
        if v.shape != self.base.coords.shape:
            raise ModelGeometryError("tangent and base point dimensions differ")
        K = self.base.K
        if K != 0:
            p = self.base.coords
            err = abs(K * float(_dot(K, p, v)))
            scale = math.sqrt(abs(K) * float(p @ p)) * float(np.linalg.norm(v))
            if err > QUADRIC_TOL * max(1.0, scale):
                raise ModelGeometryError(f"vector {v} is not tangent at {p} (error {err:.2e})")

    @property
    def K(self) -> float:
        return self.base.K

    def norm2(self) -> float:
        return float(_dot(self.K, self.vec, self.vec))

    def __repr__(self):
        return f"ModelTangent(base={self.base.coords.tolist()}, vec={self.vec.tolist()})"


def basepoint(K: float) -> ModelPoint:
    """Fixed origin of the normalized placements."""
    return ModelPoint(K, _base(K))


def in_convex_region(p: ModelPoint) -> bool:
    return bool(_in_region(p.K, p.coords))


def _require_region(*points):
    for p in points:
        if not in_convex_region(p):
            raise ModelGeometryError(f"{p} lies outside the convex model region")


def is_future_directed(v: ModelTangent) -> bool:
    """Time orientation of a causal tangent vector."""
    return bool(_future(v.K, v.base.coords, v.vec))


def model_inner(K: float, u: ModelTangent, v: ModelTangent) -> float:
    if u.K != K or v.K != K:
        raise ModelGeometryError("tangent vectors belong to a different model plane")
    if not np.allclose(u.base.coords, v.base.coords, rtol=0, atol=1e-12):
        raise ModelGeometryError("tangent vectors have different base points")
    return float(_dot(K, u.vec, v.vec))


def model_exp(K: float, p: ModelPoint, v: ModelTangent, t: float = 1.0) -> ModelPoint:
    """Point at parameter ``t`` on the geodesic with initial data ``(p, v)``."""
    if v.K != K or p.K != K:
        raise ModelGeometryError("mixed model planes")
    if not np.allclose(v.base.coords, p.coords, rtol=0, atol=1e-12):
        raise ModelGeometryError("tangent is not based at p")
    w = t * v.vec
    z = K * float(_dot(K, w, w))
    if z >= math.pi**2:
        raise ModelGeometryError(
            f"geodesic of length {math.sqrt(z / abs(K)):.6g} reaches the conjugate distance "
            f"{math.pi / math.sqrt(abs(K)):.6g}"
        )
    out = ModelPoint(K, _exp(K, p.coords, w))
    _require_region(out)
    return out


def model_log(K: float, p: ModelPoint, q: ModelPoint) -> ModelTangent:
    """Tangent ``v`` at ``p`` with ``model_exp(K, p, v, 1) == q``."""
    _require_region(p, q)
    v, n2 = _log(K, p.coords, q.coords)
    if not np.isfinite(n2):
        raise ModelGeometryError("no connecting geodesic inside the convex region")
    return ModelTangent(p, v)


def model_relation(K: float, p: ModelPoint, q: ModelPoint, tol: float = 1e-12) -> Relation:
    _require_region(p, q)
    v, n2 = _log(K, p.coords, q.coords)
    n2 = float(n2)
    scale = float(v @ v)
    if scale <= tol * tol:
        return Relation.EQUAL
    if abs(n2) <= tol * scale:
        return Relation.NULL_RELATED
    if n2 > 0:
        return Relation.SPACELIKE_SEPARATED
    if bool(_future(K, p.coords, v)):
        return Relation.CHRONOLOGICAL_FUTURE
    return Relation.CHRONOLOGICAL_PAST


def model_tau(K: float, p: ModelPoint, q: ModelPoint) -> float:
    """Time separation: the length of the timelike geodesic when ``p << q``, else 0."""
    _require_region(p, q)
    return float(_tau(K, p.coords, q.coords))


def model_signed_distance(K: float, p: ModelPoint, q: ModelPoint) -> float:
    """``-|v|`` for chronologically related points, ``+|v|`` otherwise (``v = log_p q``)."""
    _require_region(p, q)
    _, n2 = _log(K, p.coords, q.coords)
    n2 = float(n2)
    if not math.isfinite(n2):
        raise ModelGeometryError("no connecting geodesic inside the convex region")
    return -math.sqrt(-n2) if n2 < 0 else math.sqrt(n2)
