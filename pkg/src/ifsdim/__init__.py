"""Fractal dimensions of IFS attractors with their natural fractal structure."""

__version__ = "0.1.0"

from .ifs_core import IFS, Interval, PointCloud, Similarity, chaos_game, compose, deterministic_points, diameter_interval, fixed_point
from .moran import MoranSolution, moran_exponent

__all__ = [
    "IFS",
    "Interval",
    "MoranSolution",
    "PointCloud",
    "Similarity",
    "chaos_game",
    "compose",
    "deterministic_points",
    "diameter_interval",
    "fixed_point",
    "moran_exponent",
]
