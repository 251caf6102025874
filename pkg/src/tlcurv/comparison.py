"""Comparison triangles, corresponding points, angles and hinges in ``L2(K)``.

Placements are normalized: the past vertex (or hinge vertex) sits at
:func:`~tlcurv.modelspace.basepoint`, the long side runs along the future time
axis and the third vertex has nonnegative spatial coordinate. For ``K < 0`` the
configuration is instead centred in time on the basepoint so that sides up to
``D_K`` fit in the half-period strip.

The third vertex is found from the curved law of cosines

    cosh(w_p) = (a^2 H_a + c^2 H_c - b^2 H_b + K a^2 c^2 H_a H_c) / (a c S_a S_c)

with ``H_x = versq(-K x^2)`` and ``S_x = sincq(-K x^2)``; for ``K = 0`` this is
``b^2 = a^2 + c^2 - 2 a c cosh(w_p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from tlcurv import modelspace as ms
from tlcurv._trig import sincq, versq
from tlcurv.mdfun import d_max
from tlcurv.modelspace import ModelPoint, ModelTangent

TriangleKind = Literal["timelike", "causal_first_side_null", "causal_second_side_null"]
Vertex = Literal["p", "q", "r"]
SideName = Literal["pq", "qr", "pr"]
Orientation = Literal["future", "past"]

REALIZE_TOL = 1e-12


class ComparisonError(ValueError):
    pass


class NotRealizable(ComparisonError):
    """Side lengths violate the reverse triangle inequality."""


class SizeBoundError(ComparisonError):
    """The configuration does not fit below the timelike diameter ``D_K``."""


class DegenerateError(ComparisonError):
    pass


@dataclass(frozen=True)
class TriangleData:
    """Side time separations ``a = tau(p,q)``, ``b = tau(q,r)``, ``c = tau(p,r)``."""

    a: float
    b: float
    c: float
    kind: TriangleKind | None = None

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if min(a, b, c) < 0 or not all(map(math.isfinite, (a, b, c))):
            raise ComparisonError(f"side lengths must be finite and nonnegative: {(a, b, c)}")
        if a == b == c == 0:
            raise DegenerateError("all three sides vanish")
        kind = self.kind
        if kind is None:
            kind = "causal_first_side_null" if a == 0 else (
                "causal_second_side_null" if b == 0 else "timelike")
            object.__setattr__(self, "kind", kind)
        if kind == "timelike" and not (a > 0 and b > 0):
            raise ComparisonError("timelike triangles need a > 0 and b > 0")
        if kind == "causal_first_side_null" and not (a == 0 and b > 0):
            raise ComparisonError("causal_first_side_null needs a == 0 < b")
        if kind == "causal_second_side_null" and not (b == 0 and a > 0):
            raise ComparisonError("causal_second_side_null needs b == 0 < a")
        if c <= 0:
            raise DegenerateError("the long side must be timelike")


@dataclass(frozen=True)
class ModelSegment:
    """A side of a realized configuration: the geodesic ``t -> exp(start, t * tangent)``, ``t in [0, 1]``."""

    start: ModelPoint
    end: ModelPoint
    tangent: ModelTangent
    length: float
    character: Literal["timelike", "null"]

    def point(self, s: float) -> ModelPoint:
        """Point at time separation ``s`` from ``start`` (timelike sides only)."""
        if self.character != "timelike":
            raise ComparisonError("corresponding points are only defined on timelike sides")
        tol = 1e-12 * max(1.0, self.length)
        if not -tol <= s <= self.length + tol:
            raise ComparisonError(f"s = {s} outside [0, {self.length}]")
        s = min(max(s, 0.0), self.length)
        return ms.model_exp(self.start.K, self.start, self.tangent, s / self.length)


@dataclass(frozen=True)
class RealizedTriangle:
    K: float
    data: TriangleData
    p: ModelPoint
    q: ModelPoint
    r: ModelPoint
    sides: dict = field(repr=False)


def _segment(K, x, y, length):
    v = ms.model_log(K, x, y)
    character = "timelike" if length > 0 else "null"
    return ModelSegment(x, y, v, float(length), character)


def _cos_law(K, adj1, adj2, opp):
    """``cosh`` of the past/future angle between sides ``adj1``, ``adj2`` opposite ``opp``."""
    z1, z2, zo = -K * adj1**2, -K * adj2**2, -K * opp**2
    h1, h2, ho = versq(z1), versq(z2), versq(zo)
    num = adj1**2 * h1 + adj2**2 * h2 - opp**2 * ho + K * adj1**2 * adj2**2 * h1 * h2
    return num / (adj1 * adj2 * sincq(z1) * sincq(z2))


def _cos_law_middle(K, a, b, c):
    """``cosh`` of the angle at the middle vertex ``q`` (adjacent ``a``, ``b``)."""
    za, zb, zc = -K * a**2, -K * b**2, -K * c**2
    ha, hb, hc = versq(za), versq(zb), versq(zc)
    num = c**2 * hc - a**2 * ha - b**2 * hb - K * a**2 * b**2 * ha * hb
    return num / (a * b * sincq(za) * sincq(zb))


def _check_size(K, c):
    if c >= d_max(K):
        raise SizeBoundError(f"side {c} is not below D_K = {d_max(K)}")


def _placement(K, future_extent, past_extent=0.0):
    """Vertex position and frame; for K < 0 the configuration is centred on the basepoint."""
    base = ms._base(K)
    if K >= 0:
        e_t, e_x = ms.base_frame(K)
        return base, e_t, e_x
    shift = 0.5 * (future_extent - past_extent)
    e_t0, _ = ms.base_frame(K)
    vertex = ms._exp(K, base, -shift * e_t0)
    e_t, e_x = ms._frame_at(K, vertex)
    return vertex, e_t, e_x


def realize_triangle(K: float, tri: TriangleData) -> RealizedTriangle:
    """Unique (up to isometry) comparison triangle in normalized placement."""
    a, b, c = tri.a, tri.b, tri.c
    scale = max(1.0, c)
    if c < a + b - REALIZE_TOL * scale:
        raise NotRealizable(f"reverse triangle inequality fails: c = {c} < a + b = {a + b}")
    _check_size(K, c)
    p, e_t, e_x = _placement(K, c)
    r = ms._exp(K, p, c * e_t)
    if a > 0:
        x = float(_cos_law(K, a, c, b))
        if x < 1.0:
            if x < 1.0 - 1e-10:
                raise NotRealizable(f"no comparison triangle for {(a, b, c)} (cosh angle {x})")
            x = 1.0
        sh = math.sqrt(x * x - 1.0)
        q = ms._exp(K, p, a * (x * e_t + sh * e_x))
    else:
        # null first side: q = p + lam (e_t + e_x)
        zb, zc = -K * b * b, -K * c * c
        lam = float((c * c * versq(zc) - b * b * versq(zb)) / (c * sincq(zc)))
        if lam <= 0:
            raise NotRealizable(f"no causal comparison triangle for {(a, b, c)}")
        q = p + lam * (e_t + e_x)
    P, Q, R = (ModelPoint(K, x) for x in (p, q, r))
    for pt in (P, Q, R):
        if not ms.in_convex_region(pt):
            raise SizeBoundError(f"comparison vertex {pt} leaves the convex region")
    sides = {
        "pq": _segment(K, P, Q, a),
        "qr": _segment(K, Q, R, b),
        "pr": _segment(K, P, R, c),
    }
    return RealizedTriangle(K, tri, P, Q, R, sides)


def corresponding_point(rt: RealizedTriangle, side: SideName, s: float) -> ModelPoint:
    """Point on ``side`` at time separation ``s`` from the side's past endpoint."""
    if side not in rt.sides:
        raise ComparisonError(f"unknown side {side!r}")
    return rt.sides[side].point(s)


def spacetime_angle(u, v, metric=None) -> tuple[float, int]:
    """Angle ``arcosh|<u,v>|`` between unit timelike vectors and the sign of ``<u,v>``.

    ``metric`` is the Gram matrix at the common base point (Minkowski if omitted).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = np.diag([-1.0] + [1.0] * (u.size - 1)) if metric is None else np.asarray(metric, dtype=float)
    for name, x in (("u", u), ("v", v)):
        n2 = x @ g @ x
        if abs(n2 + 1.0) > 1e-10:
            raise ComparisonError(f"{name} is not unit timelike (<{name},{name}> = {n2})")
    ip = u @ g @ v
    sign = 1 if ip > 0 else -1
    # |u + sign v|^2 = 4 sinh^2(angle/2) keeps small angles accurate
    d = u + sign * v
    return 2.0 * math.asinh(0.5 * math.sqrt(max(d @ g @ d, 0.0))), sign


def _model_angle(K, x, y, z):
    """Angle at model point ``x`` between the geodesics to ``y`` and ``z``."""
    u, nu = ms._log(K, x, y)
    v, nv = ms._log(K, x, z)
    u = u / math.sqrt(-nu)
    v = v / math.sqrt(-nv)
    return spacetime_angle(u, v, ms.ambient_metric(K))


def comparison_angle(K: float, tri: TriangleData, vertex: Vertex) -> tuple[float, int]:
    """``K``-comparison angle at ``vertex`` and its sign, from the realized triangle."""
    a, b, c = tri.a, tri.b, tri.c
    need = {"p": (a, c), "q": (a, b), "r": (b, c)}
    if vertex not in need:
        raise ComparisonError(f"unknown vertex {vertex!r}")
    if min(need[vertex]) <= 0:
        raise ComparisonError(f"angle at {vertex} is adjacent to a null side")
    rt = realize_triangle(K, tri)
    P, Q, R = rt.p.coords, rt.q.coords, rt.r.coords
    if vertex == "p":
        return _model_angle(K, P, Q, R)
    if vertex == "q":
        return _model_angle(K, Q, P, R)
    return _model_angle(K, R, P, Q)


def signed_comparison_angle(K: float, a, b, c, vertex: Vertex):
    """Vectorized signed comparison angle straight from the curved law of cosines.

    Returns NaN where the sides are not realizable.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    with np.errstate(invalid="ignore", divide="ignore"):
        if vertex == "p":
            x, sign = _cos_law(K, a, c, b), -1.0
        elif vertex == "r":
            x, sign = _cos_law(K, b, c, a), -1.0
        elif vertex == "q":
            x, sign = _cos_law_middle(K, a, b, c), 1.0
        else:
            raise ComparisonError(f"unknown vertex {vertex!r}")
        x = np.where((x < 1.0) & (x > 1.0 - 1e-10), 1.0, x)
        return sign * np.arccosh(x)


@dataclass(frozen=True)
class HingeData:
    angle: float
    sign: int
    lengths: tuple[float, float]
    orientations: tuple[Orientation, Orientation] = ("future", "future")

    def __post_init__(self):
        if self.angle < 0:
            raise ComparisonError("hinge angle must be nonnegative")
        if any(o not in ("future", "past") for o in self.orientations):
            raise ComparisonError(f"bad orientations {self.orientations}")
        expected = -1 if self.orientations[0] == self.orientations[1] else 1
        if self.sign != expected:
            raise ComparisonError(f"sign {self.sign} inconsistent with orientations {self.orientations}")
        if min(self.lengths) <= 0:
            raise ComparisonError("hinge sides must have positive length")


class HingeRealization(NamedTuple):
    alpha: ModelSegment
    beta: ModelSegment
    endpoint_tau: float


def realize_hinge(K: float, h: HingeData) -> HingeRealization:
    """Comparison hinge at the basepoint and ``tau(alpha(l1), beta(l2))`` in the model."""
    l1, l2 = h.lengths
    for ell in (l1, l2):
        _check_size(K, ell)
    o1 = 1.0 if h.orientations[0] == "future" else -1.0
    o2 = 1.0 if h.orientations[1] == "future" else -1.0
    fut = max([ell for ell, o in ((l1, o1), (l2, o2)) if o > 0], default=0.0)
    past = max([ell for ell, o in ((l1, o1), (l2, o2)) if o < 0], default=0.0)
    x, e_t, e_x = _placement(K, fut, past)
    ua = o1 * e_t
    ub = o2 * (math.cosh(h.angle) * e_t + math.sinh(h.angle) * e_x)
    X = ModelPoint(K, x)
    ends = []
    for u, ell in ((ua, l1), (ub, l2)):
        y = ModelPoint(K, ms._exp(K, x, ell * u))
        if not ms.in_convex_region(y):
            raise SizeBoundError(f"hinge endpoint {y} leaves the convex region")
        ends.append(ModelSegment(X, y, ModelTangent(X, ell * u), float(ell), "timelike"))
    alpha, beta = ends
    return HingeRealization(alpha, beta, ms.model_tau(K, alpha.end, beta.end))


def hinge_endpoint_tau(K: float, angle, sign, o1, o2, l1, l2):
    """Vectorized :func:`realize_hinge` endpoint separation; ``o1``, ``o2`` are +-1 orientations.

    ``sign`` is implied by the orientations and kept for symmetry with :class:`HingeData`.
    """
    angle, o1, o2, l1, l2 = (np.asarray(x, dtype=float) for x in (angle, o1, o2, l1, l2))
    if K < 0:
        fut = np.maximum(np.where(o1 > 0, l1, 0.0), np.where(o2 > 0, l2, 0.0))
        past = np.maximum(np.where(o1 < 0, l1, 0.0), np.where(o2 < 0, l2, 0.0))
        e_t0, _ = ms.base_frame(K)
        shift = 0.5 * (fut - past)
        x = ms._exp(K, ms._base(K), -shift[..., None] * e_t0)
        e_t, e_x = ms._frame_at(K, x)
    else:
        e_t, e_x = ms.base_frame(K)
        x = ms._base(K)
    ua = o1[..., None] * e_t
    ub = o2[..., None] * (np.cosh(angle)[..., None] * e_t + np.sinh(angle)[..., None] * e_x)
    ya = ms._exp(K, x, l1[..., None] * ua)
    yb = ms._exp(K, x, l2[..., None] * ub)
    return ms._tau(K, ya, yb)


def triangle_placement(K: float, a, b, c):
    """Vectorized normalized placement of timelike triangles: arrays ``(p, q, r)``."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if K < 0:
        e_t0, _ = ms.base_frame(K)
        p = ms._exp(K, ms._base(K), -0.5 * c[..., None] * e_t0)
        e_t, e_x = ms._frame_at(K, p)
    else:
        e_t, e_x = ms.base_frame(K)
        p = np.broadcast_to(ms._base(K), c.shape + ms._base(K).shape)
    x = np.maximum(_cos_law(K, a, c, b), 1.0)
    sh = np.sqrt(x * x - 1.0)
    q = ms._exp(K, p, a[..., None] * (x[..., None] * e_t + sh[..., None] * e_x))
    r = ms._exp(K, p, c[..., None] * e_t)
    return np.asarray(p, dtype=float), q, r


def point_on_side(K: float, start, end, frac):
    """Vectorized point at parameter ``frac`` on the model geodesic from ``start`` to ``end``."""
    v, _ = ms._log(K, start, end)
    return ms._exp(K, start, np.asarray(frac, dtype=float)[..., None] * v)
