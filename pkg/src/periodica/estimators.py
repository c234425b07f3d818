"""Period-count estimators from persistence diagrams.

The estimators share one idea: in the diagram of an N-period signal every
structural point appears N times, so N is the gcd of point multiplicities.
Four variants trade exactness for robustness:

* :func:`n_exact` - gcd of exact multiplicities (noiseless).
* :func:`n_hat_ball` - gcd of open-ball counts around points outside the
  diagonal band of width 2*tau.
* :func:`n_hat_cluster` - gcd of single-linkage cluster sizes at scale tau,
  ignoring clusters touching the diagonal pseudo-node.
* :func:`n_hat_auto` - parameter-free: scans all scales
  (:func:`scan_h`) and returns the value > 1 held over the longest interval.

:func:`zero_crossings_estimate` is the sign-change baseline.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .diagram import PersistenceMeasure, count_ball, to_measure
from .persistence import AnnotatedDiagram, diagram_circle
from .signal import PeriodicTemplate, Signal

__all__ = [
    "ClusterScan",
    "EstimatorReport",
    "SingleLinkageCluster",
    "n_exact",
    "n_hat_ball",
    "single_linkage_partition",
    "n_hat_cluster",
    "scan_h",
    "n_hat_auto",
    "zero_crossings_estimate",
    "crossings_per_period",
]


def _gcd_all(values) -> int:
    values = [int(v) for v in values]
    if not values:
        return 1
    return reduce(math.gcd, values)


@dataclass(frozen=True)
class EstimatorReport:
    """Result of a period-count estimation."""

    n_hat: int
    method: str
    tau_used: float | None = None
    longest_interval: tuple[float, float] | None = None

    def to_json(self) -> str:
        lo, hi = self.longest_interval if self.longest_interval else (None, None)
        return json.dumps(
            {
                "n_hat": self.n_hat,
                "method": self.method,
                "tau_used": self.tau_used,
                "interval_lo": lo,
                "interval_hi": hi,
            }
        )


@dataclass(frozen=True)
class SingleLinkageCluster:
    """A single-linkage cluster: diagram point indices, flagged when it touches
    the diagonal pseudo-node."""

    indices: tuple[int, ...]
    diagonal: bool

    @property
    def size(self) -> int:
        return len(self.indices)


def n_exact(m: PersistenceMeasure) -> int:
    """gcd of all support multiplicities; 1 on empty support."""
    return _gcd_all(m.multiplicities)


def n_hat_ball(d: AnnotatedDiagram, tau: float) -> int:
    """gcd of open-ball masses around support points outside the diagonal band.

    Points with persistence <= 2*tau are excluded as centers but still counted
    inside the balls of the remaining centers.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    m = to_measure(d, 0.0)
    counts = [
        count_ball(m, p, tau) for p in m.support if p[1] - p[0] > 2.0 * tau
    ]
    return _gcd_all(counts)


def _point_distances(d: AnnotatedDiagram) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(d.pairs(), dtype=float)
    cross = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)
    to_diag = (pts[:, 1] - pts[:, 0]) / 2.0
    return cross, to_diag


def single_linkage_partition(d: AnnotatedDiagram, tau: float) -> list[SingleLinkageCluster]:
    """Connected components of the graph with edges of weight < tau.

    Nodes are the diagram points plus one diagonal pseudo-node at distance
    (death - birth)/2 from each point.  The cluster containing the pseudo-node
    is flagged diagonal and is always reported, possibly empty.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = len(d)
    cross, to_diag = _point_distances(d)
    parent = list(range(n + 1))  # node n is the diagonal pseudo-node

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for i in range(n):
        for j in np.flatnonzero(cross[i, i + 1 :] < tau):
            union(i, int(i + 1 + j))
        if to_diag[i] < tau:
            union(i, n)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    diag_root = find(n)
    clusters = [
        SingleLinkageCluster(tuple(members), root == diag_root)
        for root, members in sorted(groups.items())
    ]
    if diag_root not in groups:
        clusters.append(SingleLinkageCluster((), True))
    return clusters


def n_hat_cluster(d: AnnotatedDiagram, tau: float) -> int:
    """gcd of non-diagonal single-linkage cluster sizes at scale tau."""
    sizes = [c.size for c in single_linkage_partition(d, tau) if not c.diagonal]
    return _gcd_all(sizes)


@dataclass(frozen=True)
class ClusterScan:
    """The piecewise-constant map tau -> n_hat_cluster(d, tau).

    ``values[i]`` holds on the interval (breakpoints[i-1], breakpoints[i]],
    with breakpoints[-1] read as 0 and a final unbounded interval; the map is
    1 beyond ``domain_max`` (half the signal range).
    """

    breakpoints: tuple[float, ...]
    values: tuple[int, ...]
    domain_max: float

    def __post_init__(self):
        if len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("need one more value than breakpoints")
        if any(b <= 0 for b in self.breakpoints):
            raise ValueError("breakpoints must be positive")

    def __call__(self, tau: float) -> int:
        if tau <= 0:
            raise ValueError("tau must be positive")
        return self.values[bisect.bisect_left(self.breakpoints, tau)]

    def constant_intervals(self) -> list[tuple[float, float, int]]:
        """Maximal intervals (lo, hi, value]; the last has hi = +inf."""
        edges = (0.0,) + self.breakpoints + (math.inf,)
        return [
            (edges[i], edges[i + 1], self.values[i]) for i in range(len(self.values))
        ]


def _mst_edges(dist: np.ndarray) -> list[tuple[float, int, int]]:
    """Prim's algorithm on a dense symmetric distance matrix."""
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    best_from = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        edges.append((float(best[j]), int(best_from[j]), j))
        in_tree[j] = True
        closer = dist[j] < best
        best[closer] = dist[j][closer]
        best_from[closer] = j
    return edges


def scan_h(d: AnnotatedDiagram) -> ClusterScan:
    """Precompute the full scale scan of the clustering estimator.

    Single-linkage merges happen exactly at the MST edge weights of the
    point-plus-pseudo-node graph, so the scan processes those weights in
    ascending order and records the gcd of non-diagonal cluster sizes on each
    inter-breakpoint interval.
    """
    n = len(d)
    if n == 0:
        raise ValueError("cannot scan an empty diagram")
    cross, to_diag = _point_distances(d)
    dist = np.empty((n + 1, n + 1))
    dist[:n, :n] = cross
    dist[n, :n] = to_diag
    dist[:n, n] = to_diag
    dist[n, n] = 0.0
    edges = sorted(_mst_edges(dist))

    parent = list(range(n + 1))
    size = [1] * n + [0]  # pseudo-node carries no mass

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def current_h() -> int:
        diag_root = find(n)
        sizes = {}
        for i in range(n):
            r = find(i)
            if r != diag_root:
                sizes[r] = sizes.get(r, 0) + 1
        return _gcd_all(sizes.values())

    breakpoints: list[float] = []
    values: list[int] = [current_h()]
    k = 0
    while k < len(edges):
        w = edges[k][0]
        while k < len(edges) and edges[k][0] == w:
            _, u, v = edges[k]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[rv] = ru
            k += 1
        h = current_h()
        if h != values[-1]:
            breakpoints.append(w)
            values.append(h)
    domain_max = (d.max_value - d.min_value) / 2.0
    return ClusterScan(tuple(breakpoints), tuple(values), domain_max)


def n_hat_auto(d: AnnotatedDiagram) -> EstimatorReport:
    """Parameter-free estimate: the value > 1 held over the longest tau interval.

    Intervals are clipped to (0, domain_max]; ties between values prefer the
    larger one.  The reported tau is the midpoint of the winning interval, so
    ``n_hat_cluster(d, tau_used)`` reproduces the estimate.  When the scan
    never exceeds 1, the estimate is 1 with no tau.
    """
    scan = scan_h(d)
    best: dict[int, tuple[float, tuple[float, float]]] = {}
    for lo, hi, value in scan.constant_intervals():
        if value <= 1 or lo >= scan.domain_max:
            continue
        hi = min(hi, scan.domain_max)
        length = hi - lo
        if value not in best or length > best[value][0]:
            best[value] = (length, (lo, hi))
    if not best:
        return EstimatorReport(1, "cluster_auto")
    n_hat = max(best, key=lambda v: (best[v][0], v))
    length, interval = best[n_hat]
    tau_used = (interval[0] + interval[1]) / 2.0
    return EstimatorReport(n_hat, "cluster_auto", tau_used, interval)


def zero_crossings_estimate(s: Signal, crossings_per_period: int) -> int:
    """Count sign changes and divide by the per-period crossing count.

    A zero sample inherits the sign of the previous sample (leading zeros take
    the first nonzero sign), so exact grid hits are not double counted.  The
    result is rounded to the nearest integer and floored at 1.
    """
    if crossings_per_period < 2 or crossings_per_period % 2 != 0:
        raise ValueError("crossings_per_period must be an even integer >= 2")
    signs = np.sign(s.values)
    nonzero = np.flatnonzero(signs)
    if len(nonzero) == 0:
        return 1
    signs[: nonzero[0]] = signs[nonzero[0]]
    for i in range(1, len(signs)):
        if signs[i] == 0:
            signs[i] = signs[i - 1]
    count = int(np.sum(signs[1:] != signs[:-1]))
    return max(1, int(math.floor(count / crossings_per_period + 0.5)))


def crossings_per_period(f: PeriodicTemplate, grid: int = 4096) -> int:
    """Zero crossings of one noiseless period, read off the circle diagram.

    Each diagram point with birth < 0 < death contributes exactly two
    crossings per period.
    """
    x = np.linspace(0.0, 1.0, grid + 1)
    d = diagram_circle(Signal(x, f(x)))
    quadrant = sum(1 for p in d.points if p.birth < 0.0 < p.death)
    return 2 * quadrant
