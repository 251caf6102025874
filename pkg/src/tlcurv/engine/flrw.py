"""Scale factors for the hyperbolic-slice FLRW example.

Two second-order ODEs share the initial data ``f(0) = 1, f'(0) = 1/4``:

* ``paper_literal``:    ``f'' f - f'^2 - 2 = 0``
* ``fluid_consistent``: ``f'' f - f'^2 + 1 = 0``

For slices of curvature -1 the Einstein tensor of ``-dt^2 + f^2 h`` gives
``rho + p = (f'^2 - 1 - f f'') / (4 pi f^2)``, so only the second equation
yields ``p = -rho``. Its solution is ``f = (4/sqrt 15) cos(sqrt(15) t / 4 - arcsin(1/4))``
and the spacetime is then locally anti-de Sitter with curvature ``-15/16``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from tlcurv.engine.integrate import dopri45

Variant = Literal["paper_literal", "fluid_consistent"]
VARIANTS = ("paper_literal", "fluid_consistent")
F0, FP0 = 1.0, 0.25
MAX_STEP = 0.005

_CONSTANT = {"paper_literal": 2.0, "fluid_consistent": -1.0}


class ScaleFactorError(RuntimeError):
    pass


def _fpp(variant, f, fp):
    return (fp * fp + _CONSTANT[variant]) / f


@dataclass(frozen=True, eq=False)
class ScaleFactor:
    """Dense scale factor on ``t_range`` with derivative access.

    ``f`` is a cubic Hermite spline through the ODE nodes with slopes ``f'``,
    ``f'`` is a second spline with slopes ``f''``, and ``f''`` is evaluated
    from the ODE itself.
    """

    variant: str
    t_range: tuple[float, float]
    nodes: np.ndarray
    _f: CubicHermiteSpline
    _fp: CubicHermiteSpline

    def f(self, t):
        return self._f(t)

    def fp(self, t):
        return self._fp(t)

    def fpp(self, t):
        return _fpp(self.variant, self._f(t), self._fp(t))

    def epsilon(self) -> float:
        """Largest ``eps`` with ``f' > 0`` and ``|f'| <= 1/2`` on ``(-eps, eps)``."""
        lo, hi = self.t_range
        bounds = []
        for end in (lo, hi):
            grid = np.linspace(0.0, end, 4001)
            fp = self._fp(grid)
            bad = np.flatnonzero((fp <= 0) | (np.abs(fp) > 0.5))
            if bad.size == 0:
                bounds.append(abs(end))
                continue
            k = bad[0]
            a, b = grid[k - 1], grid[k]
            g = (lambda t: self._fp(t)) if fp[k] <= 0 else (lambda t: abs(self._fp(t)) - 0.5)
            bounds.append(abs(brentq(g, a, b, xtol=1e-14)))
        return min(bounds)


def flrw_scale_factor(variant: Variant = "fluid_consistent", t_range=(-0.5, 0.5), tol: float = 1e-12) -> ScaleFactor:
    """Integrate the scale-factor ODE of ``variant`` across ``t_range`` (which must contain 0)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown FLRW variant {variant!r}; expected one of {VARIANTS}")
    lo, hi = map(float, t_range)
    if not lo <= 0.0 <= hi or lo == hi:
        raise ValueError("t_range must contain 0")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def rhs(t, y):
        return np.stack([y[:, 1], _fpp(variant, y[:, 0], y[:, 1])], axis=1)

    pieces = []
    for end in (lo, hi):
        if end == 0.0:
            continue
        tr = dopri45(rhs, [[F0, FP0]], end, tol=tol, max_step=MAX_STEP, dense=True,
                     inside=lambda y: y[:, 0] > 0)
        if tr.exited[0]:
            raise ScaleFactorError(f"f reaches 0 before t = {end}")
        ys = np.array([y[0] for y in tr.ys])
        pieces.append((tr.ts, ys))
    ts = np.concatenate([p[0] for p in pieces])
    ys = np.concatenate([p[1] for p in pieces])
    ts, keep = np.unique(ts, return_index=True)
    ys = ys[keep]
    f, fp = ys[:, 0], ys[:, 1]
    if np.any(f <= 0):
        raise ScaleFactorError("scale factor is not positive on the requested range")
    spline_f = CubicHermiteSpline(ts, f, fp, extrapolate=False)
    spline_fp = CubicHermiteSpline(ts, fp, _fpp(variant, f, fp), extrapolate=False)
    return ScaleFactor(variant, (lo, hi), ts, spline_f, spline_fp)

