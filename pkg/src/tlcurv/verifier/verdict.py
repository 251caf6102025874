from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tlcurv.mdfun import CurvatureBound

CONDITIONS = ("triangle", "monotonicity", "angle", "hinge", "causal_triangle", "convexity")
ALL_CHECKS = CONDITIONS + ("hessian", "dalembert", "jacobi_t4", "smooth_scan")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one comparison check. ``worst_margin >= 0`` means the inequality held with slack."""

    condition: str
    bound: CurvatureBound
    samples: int
    worst_margin: float
    witness: dict
    seed: int
    tol: float
    margins: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.worst_margin >= -self.tol)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "K": self.bound.K,
            "side": self.bound.side,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
        }


def jsonable(x):
    """Nested numpy values to plain Python for the witness records (non-finite floats become None)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else None
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x
