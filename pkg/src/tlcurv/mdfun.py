"""Modified distance functions and the timelike diameter ``D_K``.

``md_tau(K, .)`` is the comparison function adapted to the time separation,
``md_S(K, .)`` its extension to signed distances. Both are evaluated through
the cancellation-free helpers in :mod:`tlcurv._trig`, so small ``K t**2``
behaves like the flat branch ``t**2 / 2`` to full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from tlcurv._trig import cosq, sincq, versq

Side = Literal["below", "above"]

# Below this |K| the flat branch is used verbatim.
FLAT_K = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of a modified distance function."""


@dataclass(frozen=True)
class CurvatureBound:
    """A synthetic curvature bound: constant ``K`` and the direction ``side``.

    ``orient`` maps a margin computed for the ``below`` inequality onto the
    requested side, so every checker has positive = "bound holds".
    """

    K: float
    side: Side = "below"

    def __post_init__(self):
        if not math.isfinite(self.K):
            raise ValueError(f"curvature bound must be finite, got {self.K!r}")
        if self.side not in ("below", "above"):
            raise ValueError(f"side must be 'below' or 'above', got {self.side!r}")

    @property
    def sign(self) -> int:
        return 1 if self.side == "below" else -1

    def orient(self, margin_below):
        return self.sign * margin_below


def d_max(K: float) -> float:
    """Timelike diameter ``D_K``: ``inf`` for ``K >= 0``, ``pi / sqrt(-K)`` otherwise."""
    if not math.isfinite(K):
        raise ValueError(f"K must be finite, got {K!r}")
    if K >= 0:
        return math.inf
    return math.pi / math.sqrt(-K)


def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def md_tau(K: float, t):
    """``t**2/2`` (K = 0), ``(cosh(sqrt(K) t) - 1)/K`` (K > 0), ``(cos(sqrt(-K) t) - 1)/K`` (K < 0)."""
    t = np.asarray(t, dtype=float)
    _check((t >= 0) & (t < d_max(K)), f"md_tau({K}, t) needs 0 <= t < D_K")
    if abs(K) < FLAT_K:
        return _scalar_or_array(0.5 * t * t)
    return _scalar_or_array(t * t * versq(-K * t * t))


def md_tau_prime(K: float, t):
    t = np.asarray(t, dtype=float)
    _check((t >= 0) & (t < d_max(K)), f"md_tau'({K}, t) needs 0 <= t < D_K")
    if abs(K) < FLAT_K:
        return _scalar_or_array(t)
    return _scalar_or_array(t * sincq(-K * t * t))


def md_tau_second(K: float, t):
    t = np.asarray(t, dtype=float)
    _check((t >= 0) & (t < d_max(K)), f"md_tau''({K}, t) needs 0 <= t < D_K")
    if abs(K) < FLAT_K:
        return _scalar_or_array(np.ones_like(t))
    return _scalar_or_array(cosq(-K * t * t))


def md_ratio(K: float, t):
    """``md_tau'' / md_tau'`` at ``t > 0``: ``1/t``, ``sqrt(K) coth``, ``sqrt(-K) cot``"""
    t = np.asarray(t, dtype=float)
    _check((t > 0) & (t < d_max(K)), f"md ratio needs 0 < t < D_K (K={K})")
    return _scalar_or_array(np.asarray(md_tau_second(K, t)) / np.asarray(md_tau_prime(K, t)))


def _md_S_domain(K, t):
    _check((t > -d_max(K)) & (t < d_max(-K)), f"md_S({K}, t) needs -D_K < t < D_-K")


def md_S(K: float, t):
    """Extended modified distance: ``md_tau(-K, t)`` for ``t >= 0``, ``-md_tau(K, -t)`` for ``t < 0``."""
    t = np.asarray(t, dtype=float)
    _md_S_domain(K, t)
    # md_tau(-K, |t|) and -md_tau(K, |t|) collapse to t|t| versq(K t|t|)
    q = t * np.abs(t)
    if abs(K) < FLAT_K:
        return _scalar_or_array(0.5 * q)
    return _scalar_or_array(q * versq(K * q))


def md_S_prime(K: float, t):
    t = np.asarray(t, dtype=float)
    _md_S_domain(K, t)
    q = t * np.abs(t)
    return _scalar_or_array(np.abs(t) * sincq(K * q))


def md_S_second(K: float, t):
    t = np.asarray(t, dtype=float)
    _md_S_domain(K, t)
    q = t * np.abs(t)
    return _scalar_or_array(np.sign(t) * cosq(K * q) + (t == 0))


def md_S_of_square(K: float, q):
    """``md_S(K, s)`` as a function of the signed square ``q = s|s| = <v, v>``.

    For ``v = exp_p^{-1}(x)`` this is ``md_S`` of the signed distance, and it is
    analytic in ``q`` across the light cone, unlike the signed distance itself.
    """
    q = np.asarray(q, dtype=float)
    if abs(K) < FLAT_K:
        return _scalar_or_array(0.5 * q)
    return _scalar_or_array(q * versq(K * q))
