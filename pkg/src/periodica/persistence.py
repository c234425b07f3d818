"""0-dimensional persistence diagrams of piecewise-linear signals.

The sublevel-set filtration of a sampled signal is swept with a union-find
over samples in ascending (value, index) order.  Each local minimum of the
plateau-collapsed sequence creates a component; when two components meet at a
local maximum, the younger one (larger minimum; ties broken by index) dies at
that level.  The surviving global minimum is paired with the global maximum.
Every diagram point is annotated with the sample index of its birth minimum.

:func:`diagram_interval` treats the signal as a function on an interval,
:func:`diagram_circle` as one period of a periodic function on the circle.
:func:`brute_force_diagram` is an independent quadratic oracle that scans the
connected components of every sublevel set directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .signal import Signal

__all__ = [
    "PersistencePoint",
    "AnnotatedDiagram",
    "diagram_interval",
    "diagram_circle",
    "brute_force_diagram",
]

_CIRCLE_ENDPOINT_TOL = 1e-9
_BRUTE_FORCE_CAP = 10_000


@dataclass(frozen=True, order=True)
class PersistencePoint:
    """A diagram point (birth, death) tied to the index of its birth minimum."""

    birth: float
    death: float
    birth_index: int

    def __post_init__(self):
        if self.death < self.birth:
            raise ValueError("death must be at least birth")

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class AnnotatedDiagram:
    """Multiset of persistence points plus the essential-class annotation.

    ``times``, when present, are the sample times of the source signal, so a
    point's birth time is ``times[point.birth_index]``.
    """

    points: tuple[PersistencePoint, ...]
    domain_kind: str
    essential_index: int
    times: np.ndarray | None = None

    def __post_init__(self):
        if self.domain_kind not in ("interval", "circle"):
            raise ValueError(f"unknown domain kind {self.domain_kind!r}")
        object.__setattr__(self, "points", tuple(sorted(self.points)))

    def __len__(self) -> int:
        return len(self.points)

    def pairs(self) -> list[tuple[float, float]]:
        """The (birth, death) multiset in sorted order."""
        return [(p.birth, p.death) for p in self.points]

    @property
    def min_value(self) -> float:
        return min(p.birth for p in self.points)

    @property
    def max_value(self) -> float:
        return max(p.death for p in self.points)

    def to_json(self) -> str:
        return json.dumps(
            {
                "domain_kind": self.domain_kind,
                "essential_index": self.essential_index,
                "points": [
                    {"birth": p.birth, "death": p.death, "birth_index": p.birth_index}
                    for p in self.points
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "AnnotatedDiagram":
        doc = json.loads(text)
        pts = tuple(
            PersistencePoint(p["birth"], p["death"], p["birth_index"])
            for p in doc["points"]
        )
        return AnnotatedDiagram(pts, doc["domain_kind"], doc["essential_index"])


def _collapse_plateaus(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop repeated consecutive values, keeping the first index of each run."""
    keep = np.concatenate([[True], np.diff(values) != 0])
    idx = np.flatnonzero(keep)
    return values[keep], idx


def _sweep(values: np.ndarray, orig_idx: np.ndarray, cyclic: bool):
    """Union-find sweep over a plateau-free sequence; returns (points, essential_index)."""
    n = len(values)
    if n == 1:
        pt = PersistencePoint(float(values[0]), float(values[0]), int(orig_idx[0]))
        return [pt], int(orig_idx[0])

    order = np.argsort(values, kind="stable")
    parent = np.arange(n)
    birth_value = np.empty(n)
    birth_local = np.empty(n, dtype=np.intp)
    processed = np.zeros(n, dtype=bool)
    points: list[PersistencePoint] = []

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in order:
        if cyclic:
            nbrs = ((i - 1) % n, (i + 1) % n)
        else:
            nbrs = tuple(j for j in (i - 1, i + 1) if 0 <= j < n)
        ready = [j for j in nbrs if processed[j]]
        processed[i] = True
        if not ready:
            birth_value[i] = values[i]
            birth_local[i] = i
            continue
        r0 = find(ready[0])
        parent[i] = r0
        if len(ready) == 2:
            r1 = find(ready[1])
            if r0 != r1:
                key0 = (birth_value[r0], birth_local[r0])
                key1 = (birth_value[r1], birth_local[r1])
                young, old = (r0, r1) if key0 > key1 else (r1, r0)
                points.append(
                    PersistencePoint(
                        float(birth_value[young]),
                        float(values[i]),
                        int(orig_idx[birth_local[young]]),
                    )
                )
                parent[young] = old

    root = find(int(order[0]))
    essential_index = int(orig_idx[birth_local[root]])
    points.append(
        PersistencePoint(float(birth_value[root]), float(np.max(values)), essential_index)
    )
    return points, essential_index


def diagram_interval(s: Signal) -> AnnotatedDiagram:
    """Annotated diagram of the sublevel-set filtration of a signal on an interval."""
    values, idx = _collapse_plateaus(s.values)
    points, essential = _sweep(values, idx, cyclic=False)
    return AnnotatedDiagram(tuple(points), "interval", essential, times=s.times)


def diagram_circle(s: Signal) -> AnnotatedDiagram:
    """Annotated diagram of one period of a periodic signal, on the circle.

    The first and last sample must agree (one full period); the duplicated
    endpoint is dropped and the sweep runs with wraparound adjacency, starting
    from the global minimum so tie-breaking is canonical.
    """
    if abs(s.values[0] - s.values[-1]) > _CIRCLE_ENDPOINT_TOL:
        raise ValueError(
            "circle diagram requires matching endpoint values "
            f"(gap {abs(s.values[0] - s.values[-1]):.3e})"
        )
    raw = s.values[:-1]
    values, idx = _collapse_plateaus(raw)
    # collapse a plateau that wraps around the seam
    while len(values) > 1 and values[0] == values[-1]:
        values, idx = values[:-1], idx[:-1]
    n = len(values)
    i0 = int(np.argsort(values, kind="stable")[0])
    rot_values = np.concatenate([values[i0:], values[:i0]])
    rot_idx = np.concatenate([idx[i0:], idx[:i0]])
    points, essential = _sweep(rot_values, rot_idx, cyclic=n > 1)
    return AnnotatedDiagram(tuple(points), "circle", essential, times=s.times)


def brute_force_diagram(s: Signal) -> AnnotatedDiagram:
    """Independent oracle: scan connected components of every sublevel set.

    For each critical level in ascending order, the maximal runs of samples
    below the level are enumerated; each run is identified by its minimal
    (value, index) sample.  A run representative that disappears merged into
    an older run and dies at that level.  Quadratic; capped at 10^4 samples.
    """
    v = np.asarray(s.values, dtype=float)
    n = len(v)
    if n > _BRUTE_FORCE_CAP:
        raise ValueError(f"brute-force oracle capped at {_BRUTE_FORCE_CAP} samples")
    levels = np.unique(v)
    alive: dict[int, float] = {}
    points: list[PersistencePoint] = []
    for level in levels:
        mask = v <= level
        reps: set[int] = set()
        i = 0
        while i < n:
            if not mask[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            run = np.arange(i, j + 1)
            rv = v[run]
            rep = int(run[np.argsort(rv, kind="stable")[0]])
            reps.add(rep)
            i = j + 1
        for rep in list(alive):
            if rep not in reps:
                points.append(PersistencePoint(alive.pop(rep), float(level), rep))
        for rep in reps:
            if rep not in alive:
                alive[rep] = float(v[rep])
    (rep, birth), = alive.items()
    points.append(PersistencePoint(birth, float(np.max(v)), rep))
    return AnnotatedDiagram(tuple(points), "interval", rep, times=s.times)
