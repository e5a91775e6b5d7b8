"""Empirical box counting on point clouds.

Two counters per scale: occupied cells of an axis-aligned grid, and a greedy
packing of disjoint radius-``delta`` balls centred at cloud points.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .ifs_core import PointCloud


def _points(cloud) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if len(pts) == 0:
        raise ValueError("cannot box-count an empty cloud")
    return pts


def _check_scales(scales: Sequence[float]) -> np.ndarray:
    deltas = np.asarray(scales, dtype=float)
    if deltas.ndim != 1 or len(deltas) == 0:
        raise ValueError("scales must be a non-empty sequence")
    if np.any(deltas <= 0) or not np.all(np.isfinite(deltas)):
        raise ValueError("scales must be positive and finite")
    if np.any(np.diff(deltas) >= 0):
        raise ValueError("scales must be strictly decreasing")
    return deltas


def grid_count(points: np.ndarray, delta: float) -> int:
    """Occupied cells of side ``delta``, grid anchored at the bounding-box corner."""
    cells = np.floor((points - points.min(axis=0)) / delta).astype(np.int64)
    shape = cells.max(axis=0) + 1
    if float(np.prod(shape.astype(float))) < 2.0**62:
        keys = np.ravel_multi_index(cells.T, tuple(shape.tolist()))
        return int(np.unique(keys).size)
    return int(np.unique(cells, axis=0).shape[0])


def packing_count(points: np.ndarray, delta: float) -> int:
    """First-fit packing: a point becomes a centre if it is farther than ``2 delta`` from all centres.

    Points are visited in cloud order.  Batches are screened against earlier
    centres with a k-d tree; only the survivors are resolved one by one, so the
    result equals the plain sequential pass.
    """
    sep = 2.0 * delta
    centres: list[np.ndarray] = []
    tree = None
    batch = 256
    start = 0
    n = len(points)
    while start < n:
        chunk = points[start:start + batch]
        start += len(chunk)
        if tree is not None:
            dist, _ = tree.query(chunk, k=1, distance_upper_bound=sep * (1 + 1e-9))
            chunk = chunk[dist > sep]
        accepted: list[np.ndarray] = []
        local: dict[tuple, list[int]] = {}
        for p in chunk:
            key = tuple(np.floor(p / sep).astype(np.int64).tolist())
            clash = False
            for off in np.ndindex(*(3,) * len(key)):
                nb = tuple(k + o - 1 for k, o in zip(key, off))
                for j in local.get(nb, ()):
                    if math.dist(p, accepted[j]) <= sep:
                        clash = True
                        break
                if clash:
                    break
            if not clash:
                local.setdefault(key, []).append(len(accepted))
                accepted.append(p)
        if accepted:
            centres.extend(accepted)
            tree = cKDTree(np.asarray(centres))
        batch = min(batch * 2, 1 << 16)
    return len(centres)


@dataclass(frozen=True)
class BoxCounts:
    deltas: np.ndarray
    grid: np.ndarray
    packing: np.ndarray

    def rows(self) -> list[dict]:
        return [
            {
                "delta": float(d),
                "grid_count": int(g),
                "packing_count": int(p),
                "log_delta": math.log(d),
                "log_count": math.log(g),
            }
            for d, g, p in zip(self.deltas, self.grid, self.packing)
        ]


def box_count(cloud, scales: Sequence[float], packing: bool = True) -> BoxCounts:
    pts = _points(cloud)
    deltas = _check_scales(scales)
    grid = np.array([grid_count(pts, d) for d in deltas])
    pack = np.array([packing_count(pts, d) for d in deltas]) if packing else np.full(len(deltas), -1)
    return BoxCounts(deltas, grid, pack)


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    slope_stderr: float
    residuals: np.ndarray
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
            "residuals": self.residuals.tolist(),
            "degenerate": self.degenerate,
        }


def log_log_fit(deltas: np.ndarray, counts: np.ndarray) -> Fit:
    """OLS of ``log N`` against ``-log delta``."""
    x = -np.log(np.asarray(deltas, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    if np.all(counts == counts[0]):
        warnings.warn("all box counts are equal; slope set to 0", RuntimeWarning, stacklevel=3)
        return Fit(0.0, float(y[0]), 0.0, np.zeros_like(y), True)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = len(x) - 2
    sxx = float(((x - x.mean()) ** 2).sum())
    stderr = math.sqrt(float((resid**2).sum()) / dof / sxx) if dof > 0 else float("nan")
    return Fit(float(slope), float(intercept), stderr, resid, False)


@dataclass(frozen=True)
class BoxEstimate:
    counts: BoxCounts
    grid: Fit
    packing: Fit | None

    @property
    def slope(self) -> float:
        return self.grid.slope

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "scales": self.counts.deltas.tolist(),
            "grid": self.grid.to_dict(),
            "packing": None if self.packing is None else self.packing.to_dict(),
        }


def box_dimension_estimate(cloud, scales: Sequence[float], packing: bool = True) -> BoxEstimate:
    if len(scales) < 4:
        raise ValueError("need at least 4 scales for a slope estimate")
    counts = box_count(cloud, scales, packing=packing)
    grid_fit = log_log_fit(counts.deltas, counts.grid)
    pack_fit = log_log_fit(counts.deltas, counts.packing) if packing else None
    return BoxEstimate(counts, grid_fit, pack_fit)


def geometric_scales(c: float, extent: float, first: int = 3, last: int = 9) -> list[float]:
    """``c**m * extent`` for ``m = first..last``."""
    return [c**m * extent for m in range(first, last + 1)]
