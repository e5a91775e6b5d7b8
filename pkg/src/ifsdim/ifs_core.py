"""Similarities, iterated function systems and point-cloud generators.

A similarity is kept in factored form ``x -> ratio * ortho @ x + shift`` so the
contraction ratio is exact and never has to be recovered from a matrix.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

RATIO_GUARD = 1e-9
ORTHO_TOL = 1e-12
DEFAULT_ENUM_CAP = 10**7
ENUM_CAP_ENV = "IFSDIM_ENUM_CAP"
BURN_IN = 64
# above this word length the composed ratio is taken from the summed logs
LOG_RATIO_WORD_LENGTH = 50


class EnumerationCapError(RuntimeError):
    """Raised when an enumeration would need more than the configured number of items."""

    def __init__(self, required: int, cap: int, depth: int | None = None):
        self.required = required
        self.cap = cap
        self.depth = depth
        where = f" at depth {depth}" if depth is not None else ""
        super().__init__(
            f"enumeration{where} needs {required} items, cap is {cap} "
            f"(raise it with {ENUM_CAP_ENV})"
        )


def enumeration_cap() -> int:
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{ENUM_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{ENUM_CAP_ENV} must be positive, got {cap}")
    return cap


def check_budget(k: int, depth: int, cap: int | None = None) -> int:
    """Return ``k**depth`` or raise :class:`EnumerationCapError` if it exceeds the cap."""
    cap = enumeration_cap() if cap is None else cap
    required = k**depth
    if required > cap:
        raise EnumerationCapError(required, cap, depth)
    return required


@dataclass(frozen=True, eq=False)
class Similarity:
    ratio: float
    ortho: np.ndarray
    shift: np.ndarray
    log_ratio: float = field(default=float("nan"))

    def __post_init__(self):
        ortho = np.array(self.ortho, dtype=float)
        shift = np.array(self.shift, dtype=float).reshape(-1)
        if ortho.ndim != 2 or ortho.shape[0] != ortho.shape[1]:
            raise ValueError(f"ortho must be a square matrix, got shape {ortho.shape}")
        d = ortho.shape[0]
        if d < 1:
            raise ValueError("ambient dimension must be positive")
        if shift.shape != (d,):
            raise ValueError(f"shift must have length {d}, got {shift.shape[0]}")
        if not np.all(np.isfinite(ortho)) or not np.all(np.isfinite(shift)):
            raise ValueError("ortho and shift must be finite")
        err = np.abs(ortho.T @ ortho - np.eye(d)).max()
        if err > ORTHO_TOL:
            raise ValueError(f"ortho is not orthogonal (max |Q^T Q - I| = {err:.3g})")
        ratio = float(self.ratio)
        log_ratio = float(self.log_ratio)
        if math.isnan(log_ratio):
            if not 0.0 < ratio < 1.0 - RATIO_GUARD:
                raise ValueError(f"similarity ratio must lie in (0, 1), got {ratio!r}")
            log_ratio = math.log(ratio)
        ortho.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "ortho", ortho)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "log_ratio", log_ratio)

    @classmethod
    def identity(cls, dim: int) -> Similarity:
        # the empty word; ratio 1 is only legal through this constructor
        return cls(1.0, np.eye(dim), np.zeros(dim), log_ratio=0.0)

    @property
    def dim(self) -> int:
        return self.ortho.shape[0]

    @property
    def linear(self) -> np.ndarray:
        return self.ratio * self.ortho

    def __call__(self, x):
        return apply(self, x)

    def then(self, inner: Similarity) -> Similarity:
        """Return ``self ∘ inner``."""
        if inner.dim != self.dim:
            raise ValueError("cannot compose similarities of different dimension")
        return Similarity(
            self.ratio * inner.ratio,
            self.ortho @ inner.ortho,
            self.ratio * (self.ortho @ inner.shift) + self.shift,
            log_ratio=self.log_ratio + inner.log_ratio,
        )

    def __repr__(self):
        return (
            f"Similarity(ratio={self.ratio!r}, ortho={self.ortho.tolist()!r}, "
            f"shift={self.shift.tolist()!r})"
        )


class IFS:
    """An ordered, finite family of similarities of a common dimension.

    Words are tuples of 0-based map indices; ``(0, 2)`` addresses ``f_1 ∘ f_3``.
    """

    def __init__(self, maps: Sequence[Similarity]):
        maps = tuple(maps)
        if not maps:
            raise ValueError("an IFS needs at least one map")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise ValueError(f"all maps must share one ambient dimension, got {sorted(dims)}")
        self.maps = maps

    @classmethod
    def from_ratios(cls, ratios: Sequence[float], dim: int = 1) -> IFS:
        """Build an IFS on the line (or in ``dim`` dimensions) with the given ratios.

        The shifts place the pieces side by side; they only matter for geometry,
        never for the ratio-based dimension formulas.
        """
        maps, offset = [], 0.0
        for c in ratios:
            t = np.zeros(dim)
            t[0] = offset
            maps.append(Similarity(c, np.eye(dim), t))
            offset += c
        return cls(maps)

    @property
    def k(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.maps])

    @property
    def log_ratios(self) -> np.ndarray:
        return np.array([m.log_ratio for m in self.maps])

    @property
    def c_max(self) -> float:
        return max(m.ratio for m in self.maps)

    def __len__(self):
        return self.k

    def __getitem__(self, i) -> Similarity:
        return self.maps[i]

    def __repr__(self):
        return f"IFS(k={self.k}, dim={self.dim}, ratios={self.ratios.tolist()})"


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape[-1:] != (dim,):
        raise ValueError(f"expected a {dim}-vector, got shape {v.shape}")
    return v


def apply(sim: Similarity, x) -> np.ndarray:
    """Evaluate ``sim`` at a point, or row-wise on an ``(m, d)`` array."""
    v = _as_vector(x, sim.dim)
    return sim.ratio * (v @ sim.ortho.T) + sim.shift


def validate_word(ifs: IFS, word: Sequence[int]) -> tuple[int, ...]:
    w = tuple(int(i) for i in word)
    for pos, i in enumerate(w):
        if not 0 <= i < ifs.k:
            raise ValueError(f"letter {i} at position {pos} is not a map index 0..{ifs.k - 1}")
    return w


def compose(ifs: IFS, word: Sequence[int]) -> Similarity:
    """Return ``f_{w[0]} ∘ f_{w[1]} ∘ ... ∘ f_{w[-1]}``; the empty word gives the identity."""
    w = validate_word(ifs, word)
    result = Similarity.identity(ifs.dim)
    for i in w:
        result = result.then(ifs.maps[i])
    if len(w) <= LOG_RATIO_WORD_LENGTH:
        ratio = math.prod(ifs.maps[i].ratio for i in w)
    else:
        ratio = math.exp(result.log_ratio)
    log_ratio = math.fsum(ifs.maps[i].log_ratio for i in w)
    return Similarity(ratio, result.ortho, result.shift, log_ratio=log_ratio)


def fixed_point(sim: Similarity) -> np.ndarray:
    return np.linalg.solve(np.eye(sim.dim) - sim.linear, sim.shift)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    provenance: dict

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"points must be an (m, d) array, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def _level_images(ifs: IFS, seed: np.ndarray, depth: int) -> np.ndarray:
    # first letter outermost, so row order is lexicographic in the word
    pts = seed.reshape(1, -1)
    for _ in range(depth):
        pts = np.concatenate([apply(m, pts) for m in ifs.maps])
    return pts


def deterministic_points(ifs: IFS, depth: int, seed=None, cap: int | None = None) -> PointCloud:
    """All images ``f_w(seed)`` for words of length ``depth``, in lexicographic word order."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    check_budget(ifs.k, depth, cap)
    x0 = fixed_point(ifs.maps[0]) if seed is None else _as_vector(seed, ifs.dim).reshape(-1)
    pts = _level_images(ifs, x0, depth)
    return PointCloud(pts, {"mode": "deterministic", "depth": depth, "seed_point": x0.tolist()})


def chaos_probabilities(ifs: IFS) -> np.ndarray:
    w = ifs.ratios ** ifs.dim
    return w / w.sum()


def chaos_game(ifs: IFS, count: int, rng_seed: int, probabilities=None,
               burn_in: int = BURN_IN) -> PointCloud:
    """Random iteration from the fixed point of the first map.

    Map ``i`` is picked with probability proportional to ``c_i**d`` unless
    ``probabilities`` is given.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    p = chaos_probabilities(ifs) if probabilities is None else np.asarray(probabilities, float)
    if p.shape != (ifs.k,) or np.any(p < 0) or not math.isclose(p.sum(), 1.0):
        raise ValueError("probabilities must be a non-negative vector summing to 1")
    rng = np.random.default_rng(rng_seed)
    choices = rng.choice(ifs.k, size=burn_in + count, p=p)
    lin = [m.linear.tolist() for m in ifs.maps]
    shifts = [m.shift.tolist() for m in ifs.maps]
    d = ifs.dim
    x = fixed_point(ifs.maps[0]).tolist()
    out = np.empty((count, d))
    # plain-float loop: per-step numpy calls dominate otherwise
    for step, i in enumerate(choices.tolist()):
        a, t = lin[i], shifts[i]
        x = [sum(a[r][c] * x[c] for c in range(d)) + t[r] for r in range(d)]
        if step >= burn_in:
            out[step - burn_in] = x
    return PointCloud(out, {"mode": "chaos-game", "seed": int(rng_seed), "count": int(count)})


def point_set_diameter(points: np.ndarray) -> float:
    """Exact diameter of a finite point set, via its convex hull once the set is large."""
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    centered = pts - pts.mean(axis=0)
    # restrict to the affine span so degenerate (e.g. collinear) clouds work
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    rank = int(np.sum(sv > sv[0] * 1e-12)) if sv[0] > 0 else 0
    if rank == 0:
        return 0.0
    coords = centered @ vt[:rank].T
    if rank == 1:
        return float(coords.max() - coords.min())
    if len(coords) > 2000:
        try:
            coords = coords[ConvexHull(coords).vertices]
        except QhullError:
            pass
    return _pairwise_max(coords)


def _pairwise_max(pts: np.ndarray, block: int = 2048) -> float:
    best = 0.0
    for start in range(0, len(pts), block):
        chunk = pts[start:start + block]
        d2 = ((chunk[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def scale(self, factor: float) -> Interval:
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return Interval(self.lo * factor, self.hi * factor)

    def power(self, s: float) -> Interval:
        if self.lo < 0:
            raise ValueError("power of an interval with a negative endpoint")
        return Interval(self.lo**s, self.hi**s)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


def diameter_interval(ifs: IFS, depth: int, cap: int | None = None) -> Interval:
    """Rigorous enclosure of ``diam(K)``.

    The level-``depth`` images of the first map's fixed point all lie in K, so
    their diameter is a lower bound; every point of K is within
    ``c_max**depth * max_i |x0 - f_i(x0)| / (1 - c_max)`` of that cloud.
    """
    cloud = deterministic_points(ifs, depth, cap=cap)
    x0 = np.asarray(cloud.provenance["seed_point"])
    step = max(float(np.linalg.norm(apply(m, x0) - x0)) for m in ifs.maps)
    c = ifs.c_max
    eps = c**depth * step / (1.0 - c)
    lo = point_set_diameter(cloud.points)
    return Interval(lo, lo + 2.0 * eps)
