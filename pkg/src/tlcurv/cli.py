"""Command-line runner: ``tlcurv check`` and ``tlcurv flrw-demo``.

Exit status: 0 when every requested verdict passes, 1 when one fails, 2 on
errors (bad chart files, unknown spacetimes, invalid options).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from tlcurv import __version__
from tlcurv.engine import chart as chart_mod
from tlcurv.engine import geodesic
from tlcurv.engine.builtins import flrw, resolve
from tlcurv.engine.chart import ChartError, einstein_tensor, orthonormal_frame, sectional_curvature
from tlcurv.engine.flrw import F0, FP0, VARIANTS, ScaleFactorError
from tlcurv.mdfun import CurvatureBound
from tlcurv.verifier import (
    CONDITIONS, SamplingError, Verdict, check_condition, dalembert_check, hessian_check, jacobi_t4_check,
    smooth_scan,
)
from tlcurv.verifier import conditions as cond_mod
from tlcurv.verifier import hessian as hess_mod
from tlcurv.verifier.sampling import VERIFIER_TOL
from tlcurv.verifier.verdict import jsonable

SCHEMA_VERSION = 1
EXTRA_CHECKS = ("hessian", "dalembert", "jacobi_t4", "smooth_scan")
P_RHO_TOL = 1e-6


@dataclass
class RunConfig:
    spacetime: str
    K: float = 0.0
    side: str = "below"
    conditions: tuple = ("all",)
    samples: int = 200
    seed: int = 0
    tol: float | None = None
    report_path: str | None = None
    emit_csv: str | None = None

    def __post_init__(self):
        if isinstance(self.conditions, str):
            self.conditions = tuple(c.strip() for c in self.conditions.split(",") if c.strip())
        self.conditions = tuple(self.conditions)
        if not self.conditions:
            raise ValueError("conditions must be nonempty")
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.side not in ("below", "above"):
            raise ValueError(f"side must be 'below' or 'above', got {self.side!r}")
        unknown = set(self.conditions) - set(CONDITIONS) - set(EXTRA_CHECKS) - {"all"}
        if unknown:
            raise ValueError(f"unknown conditions {sorted(unknown)}; known: {CONDITIONS + EXTRA_CHECKS}")

    def expanded(self) -> list[str]:
        out = []
        for c in self.conditions:
            for name in (CONDITIONS if c == "all" else (c,)):
                if name not in out:
                    out.append(name)
        return out


def engine_metadata() -> dict:
    return {
        "version": __version__,
        "integrator": "Dormand-Prince 5(4), lockstep batches",
        "integrator_tol": VERIFIER_TOL,
        "shooting_residual_tol": geodesic.SHOOT_TOL,
        "fd_relative_step": chart_mod.FD_REL_STEP,
        "fd_absolute_floor": chart_mod.FD_ABS_FLOOR,
        "fd_second_step": chart_mod.FD2_STEP,
        "hessian_step": hess_mod.STEP,
    }


def _jacobi_verdict(chart, bound, tol, seed):
    x = chart.center
    E = orthonormal_frame(chart, x[None])[0]
    res = jacobi_t4_check(chart, x, E[0], E[1], tol)
    witness = jsonable({"points": {"x": x}, "tangents": {"v": E[0], "w": E[1]}, "values": res._asdict()})
    # t^3 coefficient beyond 1e-6 counts as a failure as well
    margin = res.margin if abs(res.t3) <= 1e-6 else min(res.margin, -abs(res.t3))
    return Verdict("jacobi_t4", bound, 1, margin, witness, seed, tol)


def _scan_verdict(chart, bound, samples, seed, tol):
    res = smooth_scan(chart, planes=samples, seed=seed)
    # below <=> timelike sectional curvature <= K
    margin = bound.K - res.sup_K if bound.side == "below" else res.inf_K - bound.K
    witness = res.witnesses["sup" if bound.side == "below" else "inf"]
    witness = {**witness, "inf_K": res.inf_K, "sup_K": res.sup_K}
    return Verdict("smooth_scan", bound, samples, float(margin), witness, seed, tol)


def run_verdict(chart, bound, name, samples, seed, tol=None) -> list[Verdict]:
    if name in CONDITIONS:
        return [check_condition(chart, bound, name, samples, seed, tol or cond_mod.DEFAULT_TOL)]
    if name == "hessian":
        return [hessian_check(chart, bound, part, samples, seed, tol or hess_mod.DEFAULT_TOL)
                for part in hess_mod.PARTS]
    if name == "dalembert":
        return [dalembert_check(chart, bound, samples, seed, tol or hess_mod.DEFAULT_TOL)]
    if name == "jacobi_t4":
        return [_jacobi_verdict(chart, bound, tol or 1e-3, seed)]
    return [_scan_verdict(chart, bound, samples, seed, tol or 1e-6)]


def _write_json(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _write_csv(path, verdicts):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["condition", "K", "side", "sample", "column", "margin"])
        for v in verdicts:
            if v.margins is None:
                out.writerow([v.condition, v.bound.K, v.bound.side, 0, 0, repr(v.worst_margin)])
                continue
            for i, row in enumerate(np.atleast_2d(v.margins)):
                for k, m in enumerate(row):
                    if np.isfinite(m):
                        out.writerow([v.condition, v.bound.K, v.bound.side, i, k, repr(float(m))])


def run_check(config: RunConfig) -> dict:
    """Run the requested checks and return (and optionally write) the report."""
    t0 = time.perf_counter()
    chart = resolve(config.spacetime)
    bound = CurvatureBound(float(config.K), config.side)
    verdicts, timings = [], {}
    for name in config.expanded():
        t = time.perf_counter()
        verdicts.extend(run_verdict(chart, bound, name, config.samples, config.seed, config.tol))
        timings[name] = 1e3 * (time.perf_counter() - t)
    timings["total"] = 1e3 * (time.perf_counter() - t0)
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": jsonable(asdict(config)),
        "verdicts": [v.to_dict() for v in verdicts],
        "engine": {**engine_metadata(), "chart": chart.name,
                   "chart_params": {k: v for k, v in chart.params.items() if _json_ok(v)}},
        "timings_ms": timings,
    }
    if config.report_path:
        _write_json(config.report_path, report)
    if config.emit_csv:
        _write_csv(config.emit_csv, verdicts)
    return report


def _json_ok(value):
    try:
        json.dumps(value)
    except TypeError:
        return False
    return True


def flrw_demo(variant: str = "fluid_consistent", report_path=None, planes: int = 10_000, seed: int = 0) -> dict:
    """Density, pressure and curvature signs of the hyperbolic-slice FLRW example."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown FLRW variant {variant!r}; expected one of {VARIANTS}")
    t0 = time.perf_counter()
    chart = flrw(variant)
    sf = chart.params["scale_factor"]
    x0 = np.zeros((1, 4))
    G = einstein_tensor(chart, x0)[0]
    E = orthonormal_frame(chart, x0)[0]
    rho = float(E[0] @ G @ E[0]) / (8 * math.pi)
    pressures = [float(E[i] @ G @ E[i]) / (8 * math.pi) for i in range(1, 4)]
    p = float(np.mean(pressures))
    scan = smooth_scan(chart, planes=planes, seed=seed)
    spacelike_t0 = float(sectional_curvature(chart, x0[0], E[1], E[2]))
    slice_scan = smooth_scan(chart, region=(np.zeros(4), np.array([0.0, 0.5, 0.5, 0.5])), planes=200,
                             seed=seed, kind="spacelike")
    flag_tol = 1e-6
    timelike_above = scan.sup_K <= flag_tol
    agh_below = scan.sup_K <= flag_tol and slice_scan.inf_K >= -flag_tol and spacelike_t0 >= -flag_tol
    bound = CurvatureBound(0.0, "below")
    verdict = Verdict("smooth_scan", bound, planes, float(-scan.sup_K), scan.witnesses["sup"], seed, flag_tol)
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": {"command": "flrw-demo", "variant": variant, "planes": planes, "seed": seed,
                   "report_path": None if report_path is None else str(report_path)},
        "verdicts": [verdict.to_dict()],
        "flrw": {
            "variant": variant,
            "f0": float(sf.f(0.0)),
            "fp0": float(sf.fp(0.0)),
            "initial_data": {"f": F0, "fp": FP0},
            "epsilon": chart.params["epsilon"],
            "rho": rho,
            "pressure": p,
            "pressure_components": pressures,
            "rho_sign": int(np.sign(rho)),
            "p_plus_rho": p + rho,
            "p_equals_minus_rho": abs(p + rho) <= P_RHO_TOL,
            "sup_timelike_curvature": scan.sup_K,
            "inf_timelike_curvature": scan.inf_K,
            "spacelike_curvature_t0": spacelike_t0,
            "spacelike_scan_t0": {"inf": slice_scan.inf_K, "sup": slice_scan.sup_K},
            "timelike_above_by_0": bool(timelike_above),
            "agh_below_by_0": bool(agh_below),
        },
        "engine": engine_metadata(),
        "timings_ms": {"total": 1e3 * (time.perf_counter() - t0)},
    }
    if report_path:
        _write_json(report_path, report)
    return report


def _parser():
    ap = argparse.ArgumentParser(prog="tlcurv", description="Timelike curvature comparison checks.")
    ap.add_argument("--version", action="version", version=f"tlcurv {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    ck = sub.add_parser("check", help="run comparison checks on a spacetime")
    ck.add_argument("--spacetime", required=True, help="builtin (minkowski4, model+1, de_sitter2, flrw) or chart file")
    ck.add_argument("--K", type=float, default=0.0)
    ck.add_argument("--side", choices=("below", "above"), default="below")
    ck.add_argument("--conditions", default="all",
                    help=f"comma-separated subset of {','.join(CONDITIONS + EXTRA_CHECKS)} or 'all'")
    ck.add_argument("--samples", type=int, default=200)
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--tol", type=float, default=None, help="override the per-check default tolerance")
    ck.add_argument("--report", default=None, help="write the JSON report here")
    ck.add_argument("--emit-csv", default=None, help="write per-sample margins as CSV")
    demo = sub.add_parser("flrw-demo", help="density, pressure and curvature of the FLRW example")
    demo.add_argument("--variant", choices=VARIANTS, default="fluid_consistent")
    demo.add_argument("--planes", type=int, default=10_000)
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--report", default=None)
    return ap


def _summary(report, out):
    for v in report["verdicts"]:
        status = "PASS" if v["pass"] else "FAIL"
        print(f"{status}  {v['condition']:<16} K={v['K']:+g} {v['side']:<5}  worst margin {v['worst_margin']:+.3e}",
              file=out)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "check":
            config = RunConfig(args.spacetime, args.K, args.side, args.conditions, args.samples, args.seed,
                               args.tol, args.report, args.emit_csv)
            report = run_check(config)
            _summary(report, sys.stdout)
            return 0 if all(v["pass"] for v in report["verdicts"]) else 1
        report = flrw_demo(args.variant, args.report, args.planes, args.seed)
        fl = report["flrw"]
        for key in ("rho", "pressure", "p_plus_rho", "sup_timelike_curvature", "spacelike_curvature_t0",
                    "timelike_above_by_0", "agh_below_by_0"):
            print(f"{key:<24} {fl[key]}")
        return 0
    except (ChartError, SamplingError, ScaleFactorError, ValueError, OSError) as exc:
        print(f"tlcurv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
