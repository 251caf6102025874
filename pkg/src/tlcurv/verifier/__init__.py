"""Sampled checkers for synthetic and smooth timelike curvature bounds."""

from tlcurv.verifier.conditions import check_condition, measure, theta_grid
from tlcurv.verifier.curvature import JacobiT4Result, ScanResult, jacobi_t4_check, smooth_scan
from tlcurv.verifier.hessian import dalembert_check, hessian_check
from tlcurv.verifier.sampling import SamplingError
from tlcurv.verifier.verdict import ALL_CHECKS, CONDITIONS, Verdict

__all__ = [
    "ALL_CHECKS", "CONDITIONS", "JacobiT4Result", "SamplingError", "ScanResult", "Verdict", "check_condition",
    "dalembert_check", "hessian_check", "jacobi_t4_check", "measure", "smooth_scan", "theta_grid",
]
