"""Verification of planar open-set-condition certificates.

A certificate is an open convex polygon ``V``.  It is accepted when every
``f_i(V)`` lies in ``V`` (checked on closed hulls) and the images have
pairwise disjoint interiors.  Touching boundaries are allowed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .ifs_core import IFS, Similarity, apply

GEOM_TOL = 1e-12


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


class ConvexPolygon:
    """Open region bounded by a strictly convex, counter-clockwise vertex loop."""

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"vertices must be an (m, 2) array, got shape {v.shape}")
        if len(v) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if signed_area(v) <= GEOM_TOL:
            raise ValueError("vertices must be counter-clockwise with positive area")
        edges = np.roll(v, -1, axis=0) - v
        for i in range(len(v)):
            if _cross(edges[i], edges[(i + 1) % len(v)]) <= GEOM_TOL:
                raise ValueError(f"polygon is not strictly convex at vertex {(i + 1) % len(v)}")
        v.setflags(write=False)
        self.vertices = v

    @property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def centroid(self) -> np.ndarray:
        return _centroid(self.vertices)

    def signed_distances(self, points) -> np.ndarray:
        """Distance of each point to each edge line, positive inside; shape ``(m, edges)``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        e = self.edges
        length = np.hypot(e[:, 0], e[:, 1])
        rel = p[:, None, :] - self.vertices[None, :, :]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        return cross / length[None, :]

    def depth(self, points) -> np.ndarray:
        """Minimum signed edge distance: > 0 strictly inside, 0 on the boundary."""
        return self.signed_distances(points).min(axis=1)

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()!r})"


def _centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    w = x * yn - xn * y
    a = w.sum() / 2.0
    return np.array([((x + xn) * w).sum(), ((y + yn) * w).sum()]) / (6.0 * a)


def image_polygon(sim: Similarity, poly: ConvexPolygon) -> ConvexPolygon:
    if sim.dim != 2:
        raise ValueError("image_polygon needs a planar similarity")
    v = apply(sim, poly.vertices)
    if np.linalg.det(sim.ortho) < 0:
        v = v[::-1]
    return ConvexPolygon(v)


@dataclass(frozen=True)
class Containment:
    holds: bool
    margin: float
    witness: np.ndarray | None


def contains_open(outer: ConvexPolygon, inner: ConvexPolygon) -> Containment:
    """Closed-hull inclusion: every vertex of ``inner`` inside or on ``outer``."""
    depth = outer.depth(inner.vertices)
    bad = np.nonzero(depth < -GEOM_TOL)[0]
    witness = inner.vertices[bad[0]].copy() if len(bad) else None
    return Containment(not len(bad), float(depth.min()), witness)


def _project(v: np.ndarray, axis: np.ndarray) -> tuple[float, float]:
    d = v @ axis
    return float(d.min()), float(d.max())


def clip_polygon(subject: np.ndarray, clip: ConvexPolygon) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex vertex loop against a convex polygon."""
    out = subject
    for a, e in zip(clip.vertices, clip.edges):
        if len(out) == 0:
            break
        side = e[0] * (out[:, 1] - a[1]) - e[1] * (out[:, 0] - a[0])
        pts = []
        for i in range(len(out)):
            j = (i + 1) % len(out)
            p, q, sp, sq = out[i], out[j], side[i], side[j]
            if sp >= 0:
                pts.append(p)
            if (sp >= 0) != (sq >= 0):
                t = sp / (sp - sq)
                pts.append(p + t * (q - p))
        out = np.array(pts).reshape(-1, 2)
    return out


@dataclass(frozen=True)
class Disjointness:
    holds: bool
    separation: float
    witness: np.ndarray | None
    overlap_area: float


def interiors_disjoint(a: ConvexPolygon, b: ConvexPolygon) -> Disjointness:
    """Separating-axis test over both polygons' edge normals.

    ``separation`` is the largest gap found along a normal (negative when the
    polygons overlap).  On overlap the witness is the centroid of the
    intersection polygon, which lies strictly inside both.
    """
    best = -np.inf
    for poly in (a, b):
        for e in poly.edges:
            axis = np.array([e[1], -e[0]]) / np.hypot(e[0], e[1])
            lo_a, hi_a = _project(a.vertices, axis)
            lo_b, hi_b = _project(b.vertices, axis)
            gap = max(lo_b - hi_a, lo_a - hi_b)
            best = max(best, gap)
    if best >= -GEOM_TOL:
        return Disjointness(True, float(best), None, 0.0)
    inter = clip_polygon(a.vertices, b)
    area = abs(signed_area(inter)) if len(inter) >= 3 else 0.0
    witness = _centroid(inter) if area > 0 else inter.mean(axis=0)
    return Disjointness(False, float(best), witness, area)


@dataclass
class CertificateVerdict:
    holds: bool
    violations: list[dict] = field(default_factory=list)
    containment_margin: float = np.inf
    separation_margin: float = np.inf

    def to_dict(self) -> dict:
        def num(x):
            return None if not np.isfinite(x) else float(x)

        return {
            "holds": self.holds,
            "violations": self.violations,
            "margins": {"containment": num(self.containment_margin),
                        "separation": num(self.separation_margin)},
        }


def verify(ifs: IFS, candidate: ConvexPolygon) -> CertificateVerdict:
    """Check every containment and every pair; all violations are collected."""
    if ifs.dim != 2:
        raise ValueError("certificate verification requires d = 2")
    images = [image_polygon(m, candidate) for m in ifs.maps]
    violations = []
    cont_margin = np.inf
    sep_margin = np.inf
    for i, img in enumerate(images):
        c = contains_open(candidate, img)
        cont_margin = min(cont_margin, c.margin)
        if not c.holds:
            violations.append({"kind": "containment", "maps": [i + 1],
                               "witness": c.witness.tolist(),
                               "detail": f"vertex outside V by {-c.margin:.3g}"})
    for i, j in combinations(range(len(images)), 2):
        d = interiors_disjoint(images[i], images[j])
        sep_margin = min(sep_margin, d.separation)
        if not d.holds:
            violations.append({"kind": "overlap", "maps": [i + 1, j + 1],
                               "witness": d.witness.tolist(),
                               "detail": f"overlap area {d.overlap_area:.6g}, depth {-d.separation:.3g}"})
    return CertificateVerdict(not violations, violations, cont_margin, sep_margin)
