"""Numerical spacetime engine: charts, curvature, geodesics, built-in spacetimes."""

from tlcurv.engine.builtins import (
    anti_de_sitter_chart, builtin, de_sitter_chart, flrw, minkowski, model_chart, model_embedding, resolve,
)
from tlcurv.engine.chart import (
    ChartError, MetricChart, christoffel, christoffel_fd, einstein_tensor, inner, metric, orthonormal_frame,
    ricci, riemann, riemann_lowered, sectional_curvature,
)
from tlcurv.engine.dsl import DSLError, load_chart_file
from tlcurv.engine.flrw import ScaleFactor, flrw_scale_factor
from tlcurv.engine.geodesic import (
    GeodesicSegment, ShootingError, exp_map, integrate_geodesic, jacobi_transport, local_tau, log_map,
    signed_distance,
)

__all__ = [
    "ChartError", "DSLError", "GeodesicSegment", "MetricChart", "ScaleFactor", "ShootingError",
    "anti_de_sitter_chart", "builtin", "christoffel", "christoffel_fd", "de_sitter_chart", "einstein_tensor",
    "exp_map", "flrw", "flrw_scale_factor", "inner", "integrate_geodesic", "jacobi_transport",
    "load_chart_file", "local_tau", "log_map", "metric", "minkowski", "model_chart", "model_embedding",
    "orthonormal_frame", "resolve", "ricci", "riemann", "riemann_lowered", "sectional_curvature",
    "signed_distance",
]
