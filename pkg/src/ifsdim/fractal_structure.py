"""The natural fractal structure of an IFS attractor.

Level ``n`` is the multiset ``{f_w(K) : |w| = n}``; repeated pieces are never
merged, so level ``n`` always has ``k**n`` elements.  All diameters are kept
relative to ``diam(K)`` and in log-space; ``diam(K)`` only enters at the end
as an :class:`~ifsdim.ifs_core.Interval` factor.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .ifs_core import IFS, Interval, check_budget

# |S(s) - 1| below this counts as S(s) == 1
UNIT_BAND = 1e-12
STREAM_THRESHOLD = 10**5
STREAM_CHUNK = 1 << 16


def format_word(word: Sequence[int], k: int) -> str:
    """1-based letters, concatenated when every letter is a single digit."""
    sep = "" if k <= 9 else "."
    return sep.join(str(i + 1) for i in word)


def parse_word(text: str, k: int) -> tuple[int, ...]:
    if not text:
        return ()
    parts = text.split(".") if "." in text or k > 9 else list(text)
    return tuple(int(p) - 1 for p in parts)


@dataclass(frozen=True)
class LevelElement:
    word: tuple[int, ...]
    log_diam_rel: float

    @property
    def relative_diameter(self) -> float:
        return math.exp(self.log_diam_rel)


class Level:
    """Level ``n`` of the natural fractal structure, enumerated lazily.

    Iteration yields elements in lexicographic word order.  Bulk access goes
    through :meth:`chunks`, which streams ``(letters, log_diam)`` array pairs.
    """

    def __init__(self, ifs: IFS, index: int, cap: int | None = None):
        if index < 0:
            raise ValueError("level index must be non-negative")
        self.ifs = ifs
        self.index = index
        self.size = check_budget(ifs.k, index, cap)

    def __len__(self):
        return self.size

    def chunks(self, chunk: int = STREAM_CHUNK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        k, n = self.ifs.k, self.index
        logc = self.ifs.log_ratios
        powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
        for start in range(0, self.size, chunk):
            idx = np.arange(start, min(start + chunk, self.size), dtype=np.int64)
            letters = (idx[:, None] // powers[None, :]) % k
            yield letters, logc[letters].sum(axis=1)

    def log_diameters(self) -> np.ndarray:
        if self.size > STREAM_THRESHOLD:
            return np.concatenate([ld for _, ld in self.chunks()])
        out = np.zeros(1)
        for _ in range(self.index):
            out = (self.ifs.log_ratios[:, None] + out[None, :]).reshape(-1)
        return out

    def __iter__(self) -> Iterator[LevelElement]:
        for letters, logd in self.chunks():
            for w, ld in zip(letters.tolist(), logd.tolist()):
                yield LevelElement(tuple(w), ld)

    def weight(self, s: float) -> float:
        """``sum over the level of (relative diameter)**s``, streamed."""
        total = 0.0
        for _, logd in self.chunks():
            total += float(np.exp(s * logd).sum())
        return total


def level(ifs: IFS, n: int, cap: int | None = None) -> Level:
    return Level(ifs, n, cap)


def count_intersecting(ifs: IFS, n: int) -> int:
    """Number of level-``n`` elements meeting K, with multiplicity: always ``k**n``.

    Python integers do not overflow; :func:`log_count_intersecting` is the
    float-safe companion for formulas.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    return ifs.k**n


def log_count_intersecting(ifs: IFS, n: int) -> float:
    return n * math.log(ifs.k)


def level_sup_diameter(ifs: IFS, n: int, diam: Interval) -> Interval:
    """``δ(K, Γ_n) = c_max**n · diam(K)``, as an interval."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return diam.scale(ifs.c_max**n)


def similarity_sum(ifs: IFS, s: float) -> float:
    """``S(s) = Σ c_i**s``."""
    return math.fsum(math.exp(s * lc) for lc in ifs.log_ratios.tolist())


class Antichain:
    """A finite prefix-free set of words, each addressing a piece ``f_w(K)``."""

    def __init__(self, k: int, words):
        self.k = k
        ws = []
        for w in words:
            w = tuple(int(i) for i in w)
            if any(not 0 <= i < k for i in w):
                raise ValueError(f"word {w} has a letter outside 0..{k - 1}")
            ws.append(w)
        uniq = set(ws)
        if len(uniq) != len(ws):
            raise ValueError("antichain words must be distinct")
        # a prefix of w sorts immediately before some word extending it
        ordered = sorted(uniq)
        for a, b in zip(ordered, ordered[1:]):
            if b[: len(a)] == a:
                raise ValueError(f"word {a} is a prefix of {b}")
        self.words = tuple(ordered)
        self.complete = _is_complete(self.words, k)

    @classmethod
    def uniform(cls, k: int, n: int) -> Antichain:
        return cls(k, np.ndindex(*(k,) * n))

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def split(self, word) -> Antichain:
        """Replace ``word`` by its ``k`` one-letter extensions."""
        word = tuple(word)
        if word not in self.words:
            raise ValueError(f"{word} is not in the antichain")
        rest = [w for w in self.words if w != word]
        return Antichain(self.k, rest + [word + (i,) for i in range(self.k)])


def _is_complete(words: Sequence[tuple[int, ...]], k: int) -> bool:
    if not words:
        return False
    if words == ((),):
        return True
    if () in words:
        return False
    parts: list[list[tuple[int, ...]]] = [[] for _ in range(k)]
    for w in words:
        parts[w[0]].append(w[1:])
    return all(p and _is_complete(tuple(p), k) for p in parts)


def random_antichain(k: int, rng: np.random.Generator, splits: int, start_depth: int = 0) -> Antichain:
    """Grow a complete antichain by splitting random leaves ``splits`` times."""
    leaves = [tuple(w) for w in np.ndindex(*(k,) * start_depth)] if start_depth else [()]
    for _ in range(splits):
        j = int(rng.integers(len(leaves)))
        w = leaves.pop(j)
        leaves.extend(w + (i,) for i in range(k))
    return Antichain(k, leaves)


def _log_weight_terms(ifs: IFS, words) -> np.ndarray:
    logc = ifs.log_ratios
    return np.array([math.fsum(logc[i] for i in w) for w in words])


def antichain_weight(ifs: IFS, chain: Antichain, s: float) -> float:
    """``Σ_{w in chain} Π_j c_{w_j}**s``, via log-sum-exp."""
    if chain.k != ifs.k:
        raise ValueError(f"antichain is over {chain.k} letters, IFS has {ifs.k} maps")
    if not chain.complete:
        raise ValueError("antichain is not complete, so it is not a cover of K")
    if s < 0:
        raise ValueError("s must be non-negative")
    terms = s * _log_weight_terms(ifs, chain.words)
    top = terms.max()
    return float(math.exp(top) * math.fsum(np.exp(terms - top).tolist()))


@dataclass(frozen=True)
class HValue:
    """An H-functional at level ``n``.

    ``limit`` classifies the ``n -> ∞`` limit: ``"zero"``, ``"finite"`` or
    ``"infinite"``.  ``value`` encloses the level-``n`` infimum itself.
    """

    s: float
    n: int
    similarity_sum: float
    limit: str
    value: Interval

    @property
    def is_zero(self) -> bool:
        return self.limit == "zero"

    @property
    def is_infinite(self) -> bool:
        return self.limit == "infinite"

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "n": self.n,
            "similarity_sum": self.similarity_sum,
            "limit": self.limit,
            "value": self.value.to_dict(),
        }


def h_functional_level(ifs: IFS, n: int, s: float, diam: Interval) -> HValue:
    """Closed form of ``inf_{m >= n} Σ_{A in Γ_m} diam(A)**s = diam(K)**s · inf_m S(s)**m``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    S = similarity_sum(ifs, s)
    scale = diam.power(s)
    if abs(S - 1.0) <= UNIT_BAND:
        return HValue(s, n, S, "finite", scale)
    if S < 1.0:
        return HValue(s, n, S, "zero", Interval(0.0, 0.0))
    return HValue(s, n, S, "infinite", scale.scale(S**n))


def h_functional_window(ifs: IFS, n: int, s: float, diam: Interval, depth: int) -> Interval:
    """Closed form restricted to levels ``n..n+depth``: ``diam**s · min_m S(s)**m``."""
    S = similarity_sum(ifs, s)
    best = min(S**m for m in range(n, n + depth + 1))
    return diam.power(s).scale(best)


def h_functional_enumerated(ifs: IFS, n: int, s: float, diam: Interval, depth: int,
                            cap: int | None = None) -> Interval:
    """Sum ``diam(A)**s`` over every element of levels ``n..n+depth`` and take the minimum.

    Independent of the product formula: each level is enumerated word by word.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    best = min(Level(ifs, m, cap).weight(s) for m in range(n, n + depth + 1))
    return diam.power(s).scale(best)


@dataclass(frozen=True)
class AntichainBound:
    weight: float
    value: Interval
    splits: int
    leaves: int
    decreasing: bool

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "value": self.value.to_dict(),
            "splits": self.splits,
            "leaves": self.leaves,
            "decreasing": self.decreasing,
            "label": "upper bound",
        }


def h_upper_bound_antichain(ifs: IFS, n: int, s: float, budget: int, diam: Interval,
                            cap: int | None = None) -> AntichainBound:
    """Upper bound on the cover functionals over antichains with words of length >= n.

    Starts from level ``n`` and greedily splits the heaviest leaf while that
    lowers the total weight, for at most ``budget`` splits.  Splitting a leaf of
    weight ``w`` changes the total by ``w · (S(s) - 1)``, so the greedy pass
    splits whenever ``S(s) < 1`` and never otherwise.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if s < 0:
        raise ValueError("s must be non-negative")
    lvl = Level(ifs, n, cap)
    child_terms = [s * lc for lc in ifs.log_ratios.tolist()]
    heap = [-t for t in (s * lvl.log_diameters()).tolist()]
    heapq.heapify(heap)
    splits = 0
    while splits < budget and heap:
        top = -heap[0]
        parent = math.exp(top)
        children = [top + ct for ct in child_terms]
        gain = parent - math.fsum(math.exp(c) for c in children)
        if gain <= UNIT_BAND * parent:
            break
        heapq.heappop(heap)
        for c in children:
            heapq.heappush(heap, -c)
        splits += 1
    weight = math.fsum(math.exp(-t) for t in heap)
    return AntichainBound(weight, diam.power(s).scale(weight), splits, len(heap), splits > 0)


def splits_to_depth(k: int, n: int, depth: int) -> int:
    """Leaf splits needed to turn level ``n`` into level ``n + depth``."""
    if k == 1:
        return depth
    return (k ** (n + depth) - k**n) // (k - 1)
