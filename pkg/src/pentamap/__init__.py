"""Equilateral pentagon moduli space: metric, curvature and conformal map to the disk."""

__version__ = "0.1.0"
