"""Root of the Moran equation ``Σ c_i**s = 1``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

RESIDUAL_TOL = 1e-12
EQUAL_RATIO_RTOL = 1e-12
MAX_ITERATIONS = 400


@dataclass(frozen=True)
class MoranSolution:
    s: float
    residual: float
    iterations: int
    method: str
    bracket: tuple[float, float]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d


def _checked_ratios(ratios: Sequence[float]) -> list[float]:
    cs = [float(c) for c in ratios]
    if not cs:
        raise ValueError("need at least one ratio")
    for c in cs:
        if not 0.0 < c < 1.0:
            raise ValueError(f"ratios must lie in (0, 1), got {c!r}")
    return cs


def moran_residual(ratios: Sequence[float], s: float) -> float:
    """``g(s) = Σ c_i**s - 1``, strictly decreasing in ``s``."""
    return math.fsum([c**s for c in ratios] + [-1.0])


def equal_ratios(ratios: Sequence[float]) -> bool:
    c0 = ratios[0]
    return all(math.isclose(c, c0, rel_tol=EQUAL_RATIO_RTOL, abs_tol=0.0) for c in ratios)


def moran_exponent(ratios: Sequence[float], tol: float = 1e-12) -> MoranSolution:
    """Solve ``Σ c_i**s = 1``.

    Equal ratios use ``s = -log k / log c``.  Otherwise bisect ``g`` on
    ``[0, -log k / log c_max]``; ``g`` is positive at 0 (for k > 1) and
    ``Σ c_i**s <= k c_max**s = 1`` at the right end.
    """
    if not 0.0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol!r}")
    cs = _checked_ratios(ratios)
    k = len(cs)
    if k == 1:
        return MoranSolution(0.0, 0.0, 0, "closed-form", (0.0, 0.0))
    if equal_ratios(cs):
        s = -math.log(k) / math.log(cs[0])
        return MoranSolution(s, abs(moran_residual(cs, s)), 0, "closed-form", (s, s))

    lo, hi = 0.0, -math.log(k) / math.log(max(cs))
    g_lo, g_hi = moran_residual(cs, lo), moran_residual(cs, hi)
    iterations = 0
    while iterations < MAX_ITERATIONS:
        best_g = min(abs(g_lo), abs(g_hi))
        if hi - lo <= tol and best_g <= RESIDUAL_TOL:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = moran_residual(cs, mid)
        iterations += 1
        if g_mid == 0.0:
            lo = hi = mid
            g_lo = g_hi = 0.0
            break
        if g_mid > 0.0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    s, g = (lo, g_lo) if abs(g_lo) <= abs(g_hi) else (hi, g_hi)
    return MoranSolution(s, abs(g), iterations, "bisection", (lo, hi))
