"""Dormand-Prince 5(4) for stacks of independent ODEs sharing one step sequence.

All members of a batch advance in lockstep. That costs a few extra steps for the
easy members, but it makes the integration error a smooth function of the
initial data across the batch, which is what finite-difference Jacobians and
Hessians built from neighbouring shots rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class IntegrationError(RuntimeError):
    pass


@dataclass
class Trajectory:
    """Accepted steps of a batched solve; ``ys[k]`` has shape ``(N, d)``."""

    ts: np.ndarray
    ys: list
    fs: list
    exited: np.ndarray
    n_steps: int
    n_rejected: int

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1]

    def __call__(self, t):
        """Cubic Hermite interpolation of the state at a scalar ``t``."""
        ts = self.ts
        if not ts[0] - 1e-14 <= t <= ts[-1] + 1e-14:
            raise ValueError(f"t = {t} outside the integrated interval [{ts[0]}, {ts[-1]}]")
        k = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2))
        h = ts[k + 1] - ts[k]
        s = (t - ts[k]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * self.ys[k] + h10 * h * self.fs[k] + h01 * self.ys[k + 1] + h11 * h * self.fs[k + 1]


def dopri45(fun, y0, t_end, tol=1e-10, inside=None, h0=None, max_step=np.inf,
            max_steps=200_000, dense=False) -> Trajectory:
    """Integrate ``y' = fun(t, y)`` for a batch ``y0`` of shape ``(N, d)`` from 0 to ``t_end``.

    The local error estimate of every component must stay below
    ``tol * (1 + |y|)``. ``inside(y)`` flags members that are still in the
    domain; a member that leaves it is frozen at its last inside state and
    reported in ``Trajectory.exited``. ``t_end`` may be negative.
    """
    y = np.array(y0, dtype=float)
    if y.ndim != 2:
        raise ValueError("y0 must have shape (N, d)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    direction = 1.0 if t_end >= 0 else -1.0
    span = abs(t_end)
    alive = np.ones(len(y), dtype=bool)

    def rhs(t, z):
        out = fun(t, z)
        out[~alive] = 0.0
        return out

    t = 0.0
    f = rhs(t, y)
    ts, ys, fs = [0.0], [y.copy()], [f.copy()]
    if span == 0.0 or len(y) == 0:
        return Trajectory(np.array(ts), ys, fs, ~alive, 0, 0)

    h = min(span, max_step, h0 if h0 is not None else 0.05 * span)
    n_steps = n_rej = 0
    while t < span:
        if n_steps + n_rej >= max_steps:
            raise IntegrationError(f"step budget of {max_steps} exhausted at t = {direction * t}")
        h = min(h, span - t, max_step)
        k = [f]
        for i in range(1, 7):
            yi = y + h * direction * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(rhs(direction * (t + _C[i] * h), yi))
        y_new = yi  # seventh stage is the 5th-order solution (FSAL)
        err = h * np.abs(sum(e * kj for e, kj in zip(_E, k) if e != 0.0))
        scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        ratio = np.max(err / scale) if err.size else 0.0
        if not np.isfinite(ratio):
            ratio = np.inf
        if ratio <= 1.0:
            t = t + h if span - (t + h) > 1e-15 * span else span
            if inside is not None:
                left = alive & ~np.asarray(inside(y_new), dtype=bool)
                if left.any():
                    y_new[left] = y[left]
                    alive &= ~left
                    k[6][left] = 0.0
            y, f = y_new, k[6]
            n_steps += 1
            if dense or t == span:
                ts.append(direction * t)
                ys.append(y.copy())
                fs.append(f.copy())
            fac = 5.0 if ratio == 0 else min(5.0, 0.9 * ratio ** -0.2)
        else:
            n_rej += 1
            fac = max(0.1, 0.9 * ratio ** -0.2) if np.isfinite(ratio) else 0.1
        h *= fac
        if h < 1e-14 * max(1.0, span):
            raise IntegrationError(f"step size underflow at t = {direction * t}")
    return Trajectory(np.array(ts), ys, fs, ~alive, n_steps, n_rej)
