"""Lorentzian timelike sectional curvature comparison laboratory."""

__version__ = "0.1.0"
