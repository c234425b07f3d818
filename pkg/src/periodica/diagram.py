"""Persistence-measure operations.

A :class:`PersistenceMeasure` is a diagram seen as a discrete measure: a list
of distinct support points with positive integer multiplicities.  This module
provides the grouping of diagram points into a measure, the separation
constant delta (minimum of pairwise distances and distances to the diagonal),
open-ball mass counts, the exact bottleneck distance, measure division, and
the zigzag construction realizing a measure as one period of a PL signal.

All point distances are L-infinity; the distance of (b, d) to the diagonal is
(d - b) / 2, so "distance to the diagonal <= tau" and "persistence <= 2*tau"
coincide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .persistence import AnnotatedDiagram
from .signal import Signal

__all__ = [
    "PersistenceMeasure",
    "DiagonalBand",
    "to_measure",
    "separation_delta",
    "count_ball",
    "bottleneck",
    "realize_diagram",
    "divide_measure",
    "total_persistence",
    "diagonal_distance",
]

_BOTTLENECK_CAP = 500


def diagonal_distance(point: Sequence[float]) -> float:
    """L-infinity distance of a point to the diagonal: half its persistence."""
    return (point[1] - point[0]) / 2.0


@dataclass(frozen=True)
class DiagonalBand:
    """The set of points with persistence at most 2*tau."""

    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")

    def contains(self, point: Sequence[float]) -> bool:
        return point[1] - point[0] <= 2.0 * self.tau


@dataclass(frozen=True)
class PersistenceMeasure:
    """A diagram as a measure: distinct support points with multiplicities."""

    support: tuple[tuple[float, float], ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.support) != len(self.multiplicities):
            raise ValueError("support and multiplicities must have equal length")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support points must be pairwise distinct")
        pairs = sorted(zip(self.support, self.multiplicities))
        object.__setattr__(self, "support", tuple(p for p, _ in pairs))
        object.__setattr__(self, "multiplicities", tuple(m for _, m in pairs))

    def __len__(self) -> int:
        return len(self.support)

    @property
    def total_mass(self) -> int:
        return sum(self.multiplicities)

    def items(self):
        return zip(self.support, self.multiplicities)

    def expand(self) -> list[tuple[float, float]]:
        """The underlying multiset, each support point repeated by multiplicity."""
        out: list[tuple[float, float]] = []
        for p, m in self.items():
            out.extend([p] * m)
        return out

    def to_json(self) -> str:
        return json.dumps(
            [
                {"birth": p[0], "death": p[1], "multiplicity": m}
                for p, m in self.items()
            ]
        )

    @staticmethod
    def from_json(text: str) -> "PersistenceMeasure":
        doc = json.loads(text)
        return PersistenceMeasure(
            tuple((e["birth"], e["death"]) for e in doc),
            tuple(int(e["multiplicity"]) for e in doc),
        )


def _as_pairs(d) -> list[tuple[float, float]]:
    if isinstance(d, AnnotatedDiagram):
        return d.pairs()
    if isinstance(d, PersistenceMeasure):
        return d.expand()
    return [(float(b), float(dd)) for b, dd in d]


def to_measure(d, merge_tol: float = 0.0) -> PersistenceMeasure:
    """Group diagram points into a measure.

    Points within L-infinity distance ``merge_tol`` are identified by single
    linkage and their masses summed; the support point of a group is the mean
    of its members.  ``merge_tol = 0`` groups exactly equal points only.
    """
    if merge_tol < 0:
        raise ValueError("merge_tol must be nonnegative")
    pts = _as_pairs(d)
    if not pts:
        return PersistenceMeasure((), ())
    if merge_tol == 0.0:
        counts: dict[tuple[float, float], int] = {}
        for p in pts:
            counts[p] = counts.get(p, 0) + 1
        return PersistenceMeasure(tuple(counts), tuple(counts.values()))
    n = len(pts)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    arr = np.asarray(pts)
    for i in range(n):
        di = np.max(np.abs(arr[i + 1 :] - arr[i]), axis=1)
        for j in np.flatnonzero(di <= merge_tol):
            ri, rj = find(i), find(int(i + 1 + j))
            if ri != rj:
                parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    support, mult = [], []
    for members in groups.values():
        center = arr[members].mean(axis=0)
        support.append((float(center[0]), float(center[1])))
        mult.append(len(members))
    return PersistenceMeasure(tuple(support), tuple(mult))


def separation_delta(m: PersistenceMeasure) -> float:
    """Minimum of pairwise support distances and distances to the diagonal."""
    if len(m) == 0:
        raise ValueError("separation of an empty measure is undefined")
    pts = np.asarray(m.support)
    best = float(np.min((pts[:, 1] - pts[:, 0]) / 2.0))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = min(best, float(np.max(np.abs(pts[i] - pts[j]))))
    return best


def count_ball(m: PersistenceMeasure, p: Sequence[float], tau: float) -> int:
    """Total mass inside the open L-infinity ball of radius tau around p."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    total = 0
    for q, mult in m.items():
        if max(abs(q[0] - p[0]), abs(q[1] - p[1])) < tau:
            total += mult
    return total


def total_persistence(d) -> float:
    """Sum of half-persistences: the 1-Wasserstein distance to the empty diagram."""
    if isinstance(d, PersistenceMeasure):
        return sum(m * (p[1] - p[0]) / 2.0 for p, m in d.items())
    return sum((b2 - b1) / 2.0 for b1, b2 in _as_pairs(d))


# --- bottleneck distance ------------------------------------------------------

def _feasible(cross: np.ndarray, diag_a: np.ndarray, diag_b: np.ndarray, t: float) -> bool:
    """Perfect matching test in the diagonal-augmented bipartite graph.

    Left vertices are the points of A followed by |B| diagonal slots; right
    vertices are the points of B followed by |A| diagonal slots.  A point may
    match a point of the other diagram within distance t, or any diagonal slot
    if its half-persistence is within t; diagonal slots match each other freely.
    """
    na, nb = len(diag_a), len(diag_b)
    size = na + nb
    rows, cols = [], []
    ai, bj = np.nonzero(cross <= t)
    rows.extend(ai.tolist())
    cols.extend(bj.tolist())
    for i in np.flatnonzero(diag_a <= t):
        for k in range(na):
            rows.append(int(i))
            cols.append(nb + k)
    for j in np.flatnonzero(diag_b <= t):
        for k in range(nb):
            rows.append(na + k)
            cols.append(int(j))
    for i in range(nb):
        for k in range(na):
            rows.append(na + i)
            cols.append(nb + k)
    graph = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size)
    )
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.sum(match >= 0)) == size


def bottleneck(a, b) -> float:
    """Exact bottleneck distance between two finite diagrams.

    Binary search over candidate values (all cross distances and all
    half-persistences), with feasibility decided by maximum bipartite matching.
    """
    pa = _as_pairs(a)
    pb = _as_pairs(b)
    if len(pa) > _BOTTLENECK_CAP or len(pb) > _BOTTLENECK_CAP:
        raise ValueError(f"exact bottleneck capped at {_BOTTLENECK_CAP} points per diagram")
    if not pa and not pb:
        return 0.0
    arr_a = np.asarray(pa, dtype=float).reshape(-1, 2)
    arr_b = np.asarray(pb, dtype=float).reshape(-1, 2)
    diag_a = (arr_a[:, 1] - arr_a[:, 0]) / 2.0 if len(pa) else np.empty(0)
    diag_b = (arr_b[:, 1] - arr_b[:, 0]) / 2.0 if len(pb) else np.empty(0)
    if len(pa) and len(pb):
        cross = np.max(
            np.abs(arr_a[:, None, :] - arr_b[None, :, :]), axis=2
        )
    else:
        cross = np.empty((len(pa), len(pb)))
    candidates = np.unique(np.concatenate([[0.0], cross.ravel(), diag_a, diag_b]))
    lo, hi = 0, len(candidates) - 1
    if _feasible(cross, diag_a, diag_b, candidates[lo]):
        return float(candidates[lo])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _feasible(cross, diag_a, diag_b, candidates[mid]):
            hi = mid
        else:
            lo = mid
    return float(candidates[hi])


# --- realization --------------------------------------------------------------

def _cyclic_period(pairs: list[tuple[float, float]]) -> int:
    """Smallest cyclic period of the pair sequence (its length if aperiodic)."""
    k = len(pairs)
    for p in range(1, k):
        if k % p == 0 and all(pairs[i] == pairs[(i + p) % k] for i in range(k)):
            return p
    return k


def realize_diagram(m: PersistenceMeasure) -> Signal:
    """Realize a measure as one period of a PL zigzag signal on [0, 1].

    Knot values alternate deaths and births of the multiset sorted by
    increasing birth then decreasing death, closing with the dominant death,
    so the circle diagram of the result reproduces the measure exactly.  When
    the extremum sequence is cyclically periodic, the first knot interval is
    stretched by 10% so the function has period exactly one.
    """
    if len(m) == 0:
        raise ValueError("cannot realize an empty measure")
    pers = [p[1] - p[0] for p in m.support]
    if any(q <= 0 for q in pers):
        raise ValueError("support points must have positive persistence")
    top = max(pers)
    if sum(1 for q in pers if q == top) > 1:
        raise ValueError("the most persistent support point must be unique")
    b0, d0 = m.support[int(np.argmax(pers))]
    if any(p[0] < b0 or p[1] > d0 for p in m.support):
        raise ValueError("all support points must lie inside the dominant box")

    pairs = sorted(m.expand(), key=lambda p: (p[0], -p[1]))
    k = len(pairs)
    values = np.empty(2 * k + 1)
    for i, (birth, death) in enumerate(pairs):
        values[2 * i] = death
        values[2 * i + 1] = birth
    values[2 * k] = pairs[0][1]

    steps = np.ones(2 * k)
    if _cyclic_period(pairs) < k:
        steps[0] = 1.1
    knots = np.concatenate([[0.0], np.cumsum(steps)])
    knots /= knots[-1]
    return Signal(knots, values)


def divide_measure(m: PersistenceMeasure, n: int) -> PersistenceMeasure:
    """Divide every multiplicity by n; error if any is not divisible."""
    if n < 1:
        raise ValueError("divisor must be a positive integer")
    if any(mult % n != 0 for mult in m.multiplicities):
        raise ValueError(f"{n} does not divide every multiplicity")
    return PersistenceMeasure(m.support, tuple(mult // n for mult in m.multiplicities))
