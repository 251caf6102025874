"""Deterministic sampling of chart configurations.

Candidate ``i`` of a stream always consumes row ``i`` of a uniform matrix drawn
from ``default_rng([seed, stream])``. A configuration therefore depends only on
the seed and its index, and acceptance keeps the first ``samples`` admissible
rows in index order.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np

from tlcurv.engine.chart import inner, orthonormal_frame, random_unit_timelike, unit_orthogonal_spacelike
from tlcurv.engine.geodesic import exp_batch, separation_batch
from tlcurv.mdfun import d_max

VERIFIER_TOL = 1e-12
MAX_RAPIDITY = 0.6
MIN_SIDE_FRACTION = 0.02
MAX_ROUNDS = 8
# sampled separations stay below REACH_FRACTION * D_K after shrinking
REACH_FRACTION = 0.5


class SamplingError(RuntimeError):
    pass


@functools.lru_cache(maxsize=32)
def _shrunk(chart, radius):
    return dataclasses.replace(chart, convex_radius=radius, name=f"{chart.name}[r={radius:.6g}]")


def within_reach(chart, K: float):
    """``chart`` with its sampling radius cut down so sampled separations stay below ``D_K``."""
    limit = REACH_FRACTION * d_max(K)
    if chart.convex_radius <= limit:
        return chart
    return _shrunk(chart, limit)


def uniform_block(seed: int, stream: int, rows: int, cols: int, start: int = 0) -> np.ndarray:
    """Rows ``start .. start+rows`` of the stream's uniform matrix."""
    rng = np.random.default_rng([int(seed), int(stream)])
    if start:
        rng.random((start, cols))
    return rng.random((rows, cols))


class Columns:
    """Hands out consecutive column slices of a uniform block."""

    def __init__(self, u):
        self.u = u
        self.i = 0

    def take(self, k=1):
        out = self.u[:, self.i : self.i + k]
        self.i += k
        return out

    def scalar(self):
        return self.take(1)[:, 0]


def accumulate(measure, chart, samples, seed, stream, cols, what):
    """Run ``measure(chart, u) -> (ok, record)`` on growing index ranges until ``samples`` rows pass."""
    records, start, need = [], 0, samples
    for _ in range(MAX_ROUNDS):
        rows = max(int(1.5 * need) + 4, 8)
        ok, rec = measure(chart, uniform_block(seed, stream, rows, cols, start))
        start += rows
        records.append({k: v[ok] for k, v in rec.items()})
        need -= int(ok.sum())
        if need <= 0:
            break
    out = {k: np.concatenate([r[k] for r in records])[:samples] for k in records[0]}
    n = len(next(iter(out.values())))
    if n == 0:
        raise SamplingError(f"no admissible {what} configurations in {chart.name}")
    if n < samples:
        raise SamplingError(f"only {n} of {samples} {what} configurations admissible in {chart.name}")
    return out


def base_points(chart, u, spread=0.15, back=0.0):
    """Box of half-width ``spread * R`` around the chart centre, shifted ``back * R`` into the past."""
    R = chart.convex_radius
    x = chart.center + spread * R * (2.0 * u - 1.0)
    x[:, chart.future_axis] -= back * R
    return x


def timelike_at(chart, x, u, max_rapidity=MAX_RAPIDITY):
    return random_unit_timelike(chart, x, u, max_rapidity)[0]


def spacelike_orthogonal(chart, x, v, u):
    return unit_orthogonal_spacelike(chart, x, v, u)


def scaled(chart, u, lo, hi):
    return chart.convex_radius * (lo + (hi - lo) * u)


def exp_safe(chart, x, v, bad):
    """Batched exp; exited members are flagged in ``bad`` and parked at their start point."""
    y, vel, exited = exp_batch(chart, x, v, VERIFIER_TOL)
    bad = bad | exited | ~np.all(np.isfinite(y), axis=1)
    y = np.where(bad[:, None], x, y)
    return y, vel, bad


def separation(chart, x, y):
    """``(tau, <V,V>, V)``; ``tau`` is NaN for failed shots."""
    return separation_batch(chart, x, y, VERIFIER_TOL, strict=False)


def unit(chart, x, v):
    n2 = inner(chart, x, v, v)
    return v / np.sqrt(np.abs(n2))[:, None]


__all__ = [
    "VERIFIER_TOL", "MAX_RAPIDITY", "MIN_SIDE_FRACTION", "SamplingError", "Columns", "accumulate",
    "uniform_block", "base_points", "timelike_at", "spacelike_orthogonal", "scaled", "exp_safe",
    "separation", "unit", "orthonormal_frame",
]
