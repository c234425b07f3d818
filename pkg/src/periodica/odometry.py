"""Odometric sequences from prominent minima, and their quality metrics.

A prominent minimum is one whose diagram point lies outside the diagonal band
(persistence > 2*tau).  With N periods and K minima per period there are N*K
of them; taking every K-th gives a sequence of times advancing the phase by
exactly one turn per step, up to a tolerance governed by the sharpness of the
template around its minima (:func:`tolerance_radius`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .persistence import AnnotatedDiagram
from .signal import PeriodicTemplate, critical_points

__all__ = [
    "OdometricResult",
    "OdometryMetrics",
    "ToleranceRadius",
    "OdometryCheck",
    "DivisibilityError",
    "prominent_minima",
    "odometric_sequences",
    "tolerance_radius",
    "check_odometric_property",
    "odometry_metrics",
    "displacement_and_speed",
]

DEFAULT_CIRCUMFERENCE = 1.94  # meters


class DivisibilityError(ValueError):
    """Prominent-minima count not divisible by the period count.

    Signals a wrong tau or wrong N; carries both for diagnostics.
    """

    def __init__(self, count: int, n: int):
        super().__init__(
            f"{count} prominent minima are not divisible by N={n}; "
            "tau or N is inconsistent with the signal"
        )
        self.count = count
        self.n = n


def prominent_minima(d: AnnotatedDiagram, tau: float) -> list[int]:
    """Birth indices of diagram points with persistence > 2*tau, ascending."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return sorted(p.birth_index for p in d.points if p.persistence > 2.0 * tau)


@dataclass(frozen=True)
class OdometricResult:
    """Prominent minima split into K per-phase sequences of N events each."""

    tau: float
    n: int
    k: int
    indices: tuple[int, ...]
    times: tuple[float, ...]
    persistences: tuple[float, ...]

    @property
    def sequences(self) -> list[list[float]]:
        """sequences[k][i] is the time of the i-th event of phase k."""
        return [list(self.times[k :: self.k]) for k in range(self.k)]

    @property
    def best_k(self) -> int:
        """The phase whose minima are deepest on average (most noise-robust)."""
        pers = np.asarray(self.persistences).reshape(self.n, self.k)
        return int(np.argmax(pers.mean(axis=0)))

    @property
    def best_sequence(self) -> list[float]:
        return self.sequences[self.best_k]

    def to_json(self) -> str:
        return json.dumps(
            {"tau": self.tau, "K": self.k, "N": self.n, "sequences": self.sequences}
        )


def odometric_sequences(d: AnnotatedDiagram, tau: float, n: int) -> OdometricResult:
    """Split the prominent minima into K per-phase odometric sequences.

    Raises :class:`DivisibilityError` when the count is not a multiple of n.
    Event times come from the diagram's source signal; a diagram without
    sample times falls back to indices.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    by_index = {p.birth_index: p for p in d.points if p.persistence > 2.0 * tau}
    indices = sorted(by_index)
    if len(indices) % n != 0:
        raise DivisibilityError(len(indices), n)
    k = len(indices) // n
    if d.times is not None:
        times = tuple(float(d.times[i]) for i in indices)
    else:
        times = tuple(float(i) for i in indices)
    pers = tuple(by_index[i].persistence for i in indices)
    return OdometricResult(tau, n, k, tuple(indices), times, pers)


@dataclass(frozen=True)
class ToleranceRadius:
    """Per-minimum one-sided radii and their maximum R."""

    per_min_radii: tuple[tuple[float, float], ...]

    @property
    def r(self) -> float:
        return max(max(pair) for pair in self.per_min_radii)


def _side_radius(f: PeriodicTemplate, x0: float, level: float, direction: int,
                 step: float, refine: float) -> float:
    """Distance from x0 to the first exceedance of `level` in one direction."""
    offsets = np.arange(step, 1.0 + step, step)
    vals = f(x0 + direction * offsets)
    above = np.flatnonzero(vals > level)
    if len(above) == 0:
        return math.inf
    hi = float(offsets[above[0]])
    lo = hi - step
    while hi - lo > refine:
        mid = (lo + hi) / 2.0
        if f(x0 + direction * mid) > level:
            hi = mid
        else:
            lo = mid
    return hi


def tolerance_radius(
    f: PeriodicTemplate, nu: float, resolution: float = 1e-4, refine: float = 1e-7
) -> ToleranceRadius:
    """How far one can drift from each minimum before f rises by more than nu.

    For each local minimum x_k of one period, the radii are the distances to
    the first point where f exceeds f(x_k) + nu on the left and on the right,
    found on a dense grid and refined by bisection.  A side where the level is
    never exceeded yields the +inf sentinel.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    mins = critical_points(f, kind="min", resolution=resolution)
    radii = []
    for x0 in mins:
        level = float(f(x0)) + nu
        r_minus = _side_radius(f, x0, level, -1, resolution, refine)
        r_plus = _side_radius(f, x0, level, +1, resolution, refine)
        radii.append((r_minus, r_plus))
    return ToleranceRadius(tuple(radii))


@dataclass(frozen=True)
class OdometryCheck:
    ok: bool
    max_consecutive_deviation: float
    max_pairwise_deviation: float


def check_odometric_property(seq, gamma, bound: float) -> OdometryCheck:
    """Deviation of a sequence from advancing the phase by one turn per event.

    Reports the maximum of |gamma(t_n) - gamma(t_{n-1}) - 1| over consecutive
    events and whether it is within the bound, plus the non-cumulative form
    max over all pairs of |gamma(t_n) - gamma(t_m) - (n - m)|.
    """
    seq = np.asarray(seq, dtype=float)
    if np.any(np.diff(seq) <= 0):
        raise ValueError("sequence must be strictly increasing")
    g = np.asarray(gamma(seq), dtype=float)
    consecutive = float(np.max(np.abs(np.diff(g) - 1.0))) if len(g) > 1 else 0.0
    idx = np.arange(len(g))
    pair_dev = np.abs((g[:, None] - g[None, :]) - (idx[:, None] - idx[None, :]))
    pairwise = float(np.max(pair_dev))
    return OdometryCheck(consecutive <= bound, consecutive, pairwise)


@dataclass(frozen=True)
class OdometryMetrics:
    """Segment quality of an odometric sequence against a reference displacement."""

    d_n: tuple[float, ...]
    ts: int
    tl: int
    cr: float
    dispersion: float
    circumference: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "TS": self.ts,
                "TL": self.tl,
                "CR": self.cr,
                "dispersion": self.dispersion,
                "C": self.circumference,
                "d_n": list(self.d_n),
            }
        )


def odometry_metrics(seq, reference_gamma, circumference: float = DEFAULT_CIRCUMFERENCE) -> OdometryMetrics:
    """Inter-event displacements and the TS / TL / CR / dispersion summary.

    ``reference_gamma`` maps a time to the reference displacement in meters;
    a segment is too short below 0.9*C and too long above 1.1*C.
    """
    seq = np.asarray(seq, dtype=float)
    if len(seq) < 2:
        raise ValueError("need at least two events")
    disp = np.asarray(reference_gamma(seq), dtype=float)
    d_n = np.diff(disp)
    ts = int(np.sum(d_n < 0.9 * circumference))
    tl = int(np.sum(d_n > 1.1 * circumference))
    cr = 1.0 - (ts + tl) / len(d_n)
    dispersion = float(np.mean(np.abs(d_n - circumference)))
    return OdometryMetrics(tuple(d_n.tolist()), ts, tl, cr, dispersion, circumference)


def displacement_and_speed(
    seq, circumference: float, window_seconds: float, grid=None, num: int = 512
):
    """Step displacement function and windowed average speed.

    The displacement is the right-continuous step function C * #{t_n <= t};
    the speed at t is the displacement gained over the trailing window,
    divided by the window, evaluated on a uniform grid spanning the events.
    """
    seq = np.sort(np.asarray(seq, dtype=float))
    if len(seq) == 0:
        raise ValueError("need at least one event")
    if window_seconds <= 0:
        raise ValueError("window must be positive")

    def displacement(t):
        t = np.asarray(t, dtype=float)
        out = circumference * np.searchsorted(seq, t, side="right")
        return float(out) if out.ndim == 0 else out.astype(float)

    if grid is None:
        grid = np.linspace(seq[0], seq[-1], num)
    grid = np.asarray(grid, dtype=float)
    speeds = (displacement(grid) - displacement(grid - window_seconds)) / window_seconds
    from .signal import Signal

    return displacement, Signal(grid, speeds)
