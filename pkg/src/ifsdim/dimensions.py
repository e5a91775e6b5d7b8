"""Fractal dimensions I-VI of an IFS attractor with its natural fractal structure.

Dimensions I-III have closed forms.  IV-VI are only bounded from above, through
the antichain cover search in :mod:`ifsdim.fractal_structure`.  The box
dimension comes from a chaos-game cloud and is the only empirical number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import boxcount
from .fractal_structure import HValue, h_functional_level, h_upper_bound_antichain, level_sup_diameter
from .ifs_core import IFS, Interval, chaos_game, check_budget, diameter_interval
from .moran import MoranSolution, equal_ratios, moran_exponent

SEQUENCE_TERMS = 40
JUMP_OFFSET = 0.05
S_GRID_STEP = 0.01
CROSSCHECK_TOL = 1e-9


@dataclass(frozen=True)
class DimSequence:
    value: float
    sequence: list[tuple[int, float]]
    provenance: str
    sequence_lo: list[float] | None = None
    sequence_hi: list[float] | None = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "provenance": self.provenance,
             "sequence": [{"n": n, "value": v} for n, v in self.sequence]}
        if self.sequence_lo is not None:
            d["sequence_lo"] = self.sequence_lo
            d["sequence_hi"] = self.sequence_hi
        return d


def dim1(ifs: IFS, terms: int = SEQUENCE_TERMS) -> DimSequence:
    """``lim log N_n / (n log 2)``; every term equals ``log k / log 2``."""
    seq = [(n, math.log(ifs.k**n) / (n * math.log(2))) for n in range(1, terms + 1)]
    return DimSequence(math.log(ifs.k) / math.log(2), seq, "closed form: log k / log 2")


def _dim2_term(k: int, c: float, n: int, diam: float) -> float:
    if k == 1:
        return 0.0
    denom = -n * math.log(c) - math.log(diam) if diam > 0 else math.inf
    return n * math.log(k) / denom if denom > 0 else math.nan


def dim2(ifs: IFS, diam: Interval, terms: int = SEQUENCE_TERMS) -> DimSequence:
    """``lim log N_n / -log δ(K, Γ_n)`` with ``δ = c_max**n diam(K)``.

    The limit is ``log k / -log c_max``; the finite-``n`` terms depend on
    ``diam(K)`` and are reported for both ends of its interval.
    """
    k, c = ifs.k, ifs.c_max
    value = 0.0 if k == 1 else math.log(k) / -math.log(c)
    ns = range(1, terms + 1)
    lo = [_dim2_term(k, c, n, diam.lo) for n in ns]
    hi = [_dim2_term(k, c, n, diam.hi) for n in ns]
    mid = [(n, _dim2_term(k, c, n, diam.mid)) for n in ns]
    note = "closed form: log k / -log c_max"
    if not equal_ratios(ifs.ratios.tolist()):
        note += "; equals the box dimension only for equal ratios under OSC"
    return DimSequence(value, mid, note, lo, hi)


@dataclass(frozen=True)
class Dim3:
    solution: MoranSolution
    below: HValue | None
    above: HValue | None

    @property
    def value(self) -> float:
        return self.solution.s

    @property
    def jump_verified(self) -> bool:
        if self.below is None:
            return True
        return self.below.is_infinite and self.above.is_zero

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "solution": self.solution.to_dict(),
            "jump_verified": self.jump_verified,
            "below": None if self.below is None else self.below.to_dict(),
            "above": None if self.above is None else self.above.to_dict(),
            "provenance": f"Moran equation ({self.solution.method}), no OSC needed",
        }


def dim3(ifs: IFS, tol: float = 1e-12, offset: float = JUMP_OFFSET) -> Dim3:
    """Root of ``Σ c_i**s = 1``, with the H3 jump checked at ``s ± offset``."""
    sol = moran_exponent(ifs.ratios.tolist(), tol)
    if ifs.k == 1:
        return Dim3(sol, None, None)
    unit = Interval(1.0, 1.0)
    below = h_functional_level(ifs, 1, max(sol.s - offset, 0.0), unit)
    above = h_functional_level(ifs, 1, sol.s + offset, unit)
    return Dim3(sol, below, above)


@dataclass(frozen=True)
class Dims456:
    """Upper bounds on dimensions IV, V and VI from one antichain search."""

    iv: float
    v: float
    vi: float
    n: int
    budget: int
    grid_step: float
    delta: Interval
    evaluated: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dim4_upper": self.iv,
            "dim5_upper": self.v,
            "dim6_upper": self.vi,
            "n": self.n,
            "budget": self.budget,
            "grid_step": self.grid_step,
            "delta": self.delta.to_dict(),
            "label": "upper bound",
            "provenance": "first s on the grid where greedy antichain splitting lowers the cover sum",
            "evaluated": self.evaluated,
        }


def dims456_upper(ifs: IFS, n: int = 1, budget: int = 2000, diam: Interval | None = None,
                  step: float = S_GRID_STEP) -> Dims456:
    """Scan ``s = 0, step, 2 step, ...`` for the first value where the antichain bound trends to 0.

    Covers with words of length ``>= n`` have pieces of diameter at most
    ``c_max**n diam(K)``, so the same witnesses serve the δ-family of
    dimension VI with that δ.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    diam = Interval(1.0, 1.0) if diam is None else diam
    delta = level_sup_diameter(ifs, n, diam)
    if ifs.k == 1:
        return Dims456(0.0, 0.0, 0.0, n, budget, step, delta)
    check_budget(ifs.k, n)
    s_max = -math.log(ifs.k) / math.log(ifs.c_max) + 2 * step
    evaluated = []
    crossing = math.nan
    j = 0
    while j * step <= s_max:
        s = j * step
        bound = h_upper_bound_antichain(ifs, n, s, budget, diam)
        evaluated.append({"s": s, "weight": bound.weight, "splits": bound.splits,
                          "decreasing": bound.decreasing})
        if bound.decreasing:
            crossing = s
            break
        j += 1
    return Dims456(crossing, crossing, crossing, n, budget, step, delta, evaluated)


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def theorem_crosscheck(ifs: IFS, certificate_status: str | None, box_slope: float | None = None,
                       box_tolerance: float = 0.05, bounds: Dims456 | None = None,
                       diam: Interval | None = None) -> list[Check]:
    """Compare computed dimensions against what the Moran-type theorems guarantee.

    ``certificate_status`` is ``"holds"``, ``"violated"`` or ``None`` (no
    certificate supplied).
    """
    diam = Interval(1.0, 1.0) if diam is None else diam
    s = dim3(ifs).value
    d1 = dim1(ifs).value
    d2 = dim2(ifs, diam).value
    certified = certificate_status == "holds"
    checks = []

    if ifs.k == 1:
        checks.append(Check("box_vs_dim3", "pass", "single map: attractor is a point, all dimensions 0"))
    elif box_slope is None:
        checks.append(Check("box_vs_dim3", "not applicable", "no box estimate computed"))
    elif not certified:
        why = "no OSC certificate" if certificate_status is None else "OSC certificate violated"
        checks.append(Check("box_vs_dim3", "not applicable",
                            f"{why}; box estimate {box_slope:.4f} vs dim3 {s:.4f} (gap {box_slope - s:+.4f})"))
    else:
        gap = abs(box_slope - s)
        checks.append(Check("box_vs_dim3", "pass" if gap <= box_tolerance else "fail",
                            f"|box - dim3| = {gap:.4f}, tolerance {box_tolerance}"))

    if ifs.k == 1:
        checks.append(Check("equal_ratio_chain", "pass", "single map: all dimensions 0"))
    elif equal_ratios(ifs.ratios.tolist()) and certified:
        c = float(ifs.ratios[0])
        gamma = -math.log(2) / math.log(c)
        ok = abs(d2 - s) <= CROSSCHECK_TOL and s <= gamma * d1 + CROSSCHECK_TOL
        checks.append(Check("equal_ratio_chain", "pass" if ok else "fail",
                            f"dim2 = {d2:.12g}, dim3 = {s:.12g}, gamma_c * dim1 = {gamma * d1:.12g}"))
    else:
        checks.append(Check("equal_ratio_chain", "not applicable",
                            "needs equal ratios and a verified OSC certificate"))

    if bounds is None:
        bounds = dims456_upper(ifs, diam=diam)
    excess = bounds.iv - s
    tol = bounds.grid_step + CROSSCHECK_TOL
    ok = ifs.k == 1 or (-CROSSCHECK_TOL <= excess <= tol)
    checks.append(Check("dims456_vs_dim3", "pass" if ok else "fail",
                        f"bound - dim3 = {excess:+.6f}, grid step {bounds.grid_step}"))
    return checks


@dataclass
class DimensionReport:
    ratios: list[float]
    k: int
    dim: int
    equal_ratio: bool
    diam: Interval
    depth: int
    dim1: DimSequence
    dim2: DimSequence
    dim3: Dim3
    dims456: Dims456
    h3: HValue
    box: boxcount.BoxEstimate | None
    box_tolerance: float
    certificate: dict | None
    checks: list[Check]

    def to_dict(self) -> dict:
        return {
            "ifs": {"k": self.k, "dimension": self.dim, "ratios": self.ratios,
                    "equal_ratio": self.equal_ratio},
            "diameter": {**self.diam.to_dict(), "width": self.diam.width, "depth": self.depth,
                         "provenance": "hull diameter of the level cloud, widened by the contraction bound"},
            "dim1": self.dim1.to_dict(),
            "dim2": {**self.dim2.to_dict(),
                     "diam_caveat": "finite-n terms depend on diam(K); the limit does not"},
            "dim3": self.dim3.to_dict(),
            "dim456_upper": self.dims456.to_dict(),
            "h3": {**self.h3.to_dict(), "provenance": "diam(K)**s * inf_m S(s)**m"},
            "box_estimate": None if self.box is None else {
                **self.box.to_dict(), "tolerance": self.box_tolerance,
                "provenance": "OLS of log N against -log delta on a chaos-game cloud"},
            "osc_certificate": self.certificate,
            "crosscheck": [c.to_dict() for c in self.checks],
        }


def default_depth(k: int, limit: int = 10**6, max_depth: int = 12) -> int:
    depth = 1
    while depth < max_depth and k ** (depth + 1) <= limit:
        depth += 1
    return depth


def build_report(ifs: IFS, *, depth: int | None = None, level: int = 1, budget: int = 2000,
                 seed: int = 0, points: int = 10**6, certificate=None, diam: Interval | None = None,
                 box_tolerance: float = 0.05, scales=None, packing: bool = True) -> DimensionReport:
    """Compute every dimension for ``ifs``.

    ``certificate`` is a :class:`ifsdim.osc_certificate.CertificateVerdict` or
    ``None``.  ``diam`` overrides the computed diameter interval.
    """
    depth = default_depth(ifs.k) if depth is None else depth
    if diam is None:
        diam = diameter_interval(ifs, depth)
    else:
        check_budget(ifs.k, depth)
    s_result = dim3(ifs)
    bounds = dims456_upper(ifs, level, budget, diam)
    h3 = h_functional_level(ifs, level, s_result.value, diam)

    box = None
    if points > 0:
        cloud = chaos_game(ifs, points, seed)
        if scales is None:
            pts = cloud.points
            extent = float((pts.max(axis=0) - pts.min(axis=0)).max())
            scales = boxcount.geometric_scales(ifs.c_max, extent if extent > 0 else 1.0)
        box = boxcount.box_dimension_estimate(cloud, scales, packing=packing)

    cert_status = None
    cert_dict = None
    if certificate is not None:
        cert_status = "holds" if certificate.holds else "violated"
        cert_dict = certificate.to_dict()
    checks = theorem_crosscheck(ifs, cert_status, None if box is None else box.slope,
                                box_tolerance, bounds, diam)
    return DimensionReport(
        ratios=ifs.ratios.tolist(),
        k=ifs.k,
        dim=ifs.dim,
        equal_ratio=equal_ratios(ifs.ratios.tolist()),
        diam=diam,
        depth=depth,
        dim1=dim1(ifs),
        dim2=dim2(ifs, diam),
        dim3=s_result,
        dims456=bounds,
        h3=h3,
        box=box,
        box_tolerance=box_tolerance,
        certificate=cert_dict,
        checks=checks,
    )

