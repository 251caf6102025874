"""Entire functions of ``z = x**2`` that unify the trigonometric and hyperbolic cases.

With ``z > 0`` these are the circular functions of ``sqrt(z)``; with ``z < 0``
they continue analytically to the hyperbolic ones. All are evaluated without
cancellation near ``z = 0``.
"""

import numpy as np

_SERIES_CUTOFF = 1e-8


def cosq(z):
    """``cos(sqrt(z))``, continued to ``cosh(sqrt(-z))`` for negative ``z``."""
    z = np.asarray(z, dtype=float)
    r = np.sqrt(np.abs(z))
    return np.where(z >= 0, np.cos(r), np.cosh(r))


def sincq(z):
    """``sin(sqrt(z)) / sqrt(z)``, continued to ``sinh`` for negative ``z``; 1 at 0."""
    z = np.asarray(z, dtype=float)
    r = np.sqrt(np.abs(z))
    small = np.abs(z) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, r)
    val = np.where(z >= 0, np.sin(safe), np.sinh(safe)) / safe
    return np.where(small, 1.0 - z / 6.0 + z * z / 120.0, val)


def versq(z):
    """``(1 - cos(sqrt(z))) / z``; equals 1/2 at 0."""
    return 0.5 * sincq(np.asarray(z, dtype=float) / 4.0) ** 2


def arc_versq(u):
    """Inverse of ``u = 1 - cosq(z)`` on ``u < 2``.

    Returns ``z`` with ``z >= 0`` for ``0 <= u < 2`` and ``z < 0`` for ``u < 0``.
    """
    u = np.asarray(u, dtype=float)
    pos = 2.0 * np.arcsin(np.sqrt(np.clip(u, 0.0, 2.0) / 2.0))
    neg = 2.0 * np.arcsinh(np.sqrt(np.clip(-u, 0.0, None) / 2.0))
    return np.where(u >= 0, pos * pos, -neg * neg)
