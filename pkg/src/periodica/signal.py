"""1-D signals, periodic templates and monotone reparametrizations.

A :class:`Signal` is a finite sequence of (time, value) samples interpreted
piecewise-linearly.  A :class:`PeriodicTemplate` is a 1-periodic real function
with finitely many extrema per period.  A :class:`Reparam` is a piecewise
linear increasing bijection [0, 1] -> [0, N] encoding the phase (cumulative
wheel turns); :func:`random_reparam` draws one with uniform period boundaries.

The sampling operator :func:`sample_L`, the interpolation operator
:func:`interpolate_F` and their composition turn continuous signals into
uniformly sampled ones and back.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Signal",
    "PeriodicTemplate",
    "Reparam",
    "SmoothWarp",
    "SamplingConfig",
    "eval_template_composed",
    "sample_L",
    "interpolate_F",
    "detrend_median",
    "random_reparam",
    "smooth_random_warp",
    "critical_points",
    "period_aligned_grid",
    "BUILTIN_TEMPLATES",
    "get_template",
    "read_signal_csv",
    "write_signal_csv",
    "CsvFormatError",
]

_PERIODICITY_GRID = 10_000
_PERIODICITY_TOL = 1e-9


class CsvFormatError(ValueError):
    """Malformed signal CSV; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Signal:
    """A sampled 1-D signal, evaluated between samples by linear interpolation.

    Attributes
    ----------
    times : ndarray
        Strictly increasing sample times (seconds).
    values : ndarray
        Sample values, same length as ``times``.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or v.ndim != 1 or len(t) != len(v):
            raise ValueError("times and values must be 1-D and of equal length")
        if len(t) < 2:
            raise ValueError("a signal needs at least two samples")
        if not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("times and values must be finite")

    def __len__(self) -> int:
        return len(self.times)

    def __call__(self, t):
        """Evaluate by linear interpolation; error outside the time range."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError("evaluation outside the signal's time range")
        out = np.interp(t, self.times, self.values)
        return float(out) if out.ndim == 0 else out

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def shifted(self, offset: float) -> "Signal":
        return Signal(self.times, self.values + offset)


@dataclass(frozen=True)
class PeriodicTemplate:
    """A 1-periodic continuous function with finitely many extrema per period.

    Evaluation reduces the argument modulo 1 before calling ``fn``, so equal
    phases in different periods produce bit-identical values.

    Attributes
    ----------
    template_id : str
        Stable identifier used in serialization.
    fn : callable
        Vectorized function of the phase in [0, 1).
    derivs : tuple of callables, optional
        Analytic first/second/third derivatives, when available.
    """

    template_id: str
    fn: Callable[[np.ndarray], np.ndarray]
    derivs: tuple | None = None

    def __post_init__(self):
        # arguments are reduced mod 1 before fn sees them, so periodicity only
        # needs fn to close up at the period seam
        seam = abs(float(self.fn(np.asarray(1.0))) - float(self.fn(np.asarray(0.0))))
        if seam >= _PERIODICITY_TOL:
            raise ValueError(
                f"template {self.template_id!r} does not close up over one period "
                f"(seam gap {seam:.2e})"
            )
        x = np.linspace(0.0, 1.0, _PERIODICITY_GRID, endpoint=False)
        gap = np.max(np.abs(self(x + 1.0) - self(x)))
        if gap >= _PERIODICITY_TOL:
            raise ValueError(f"template {self.template_id!r} is not 1-periodic (gap {gap:.2e})")
        n_ext = len(critical_points(self, kind="all", resolution=1.0 / 4096))
        if n_ext == 0 or n_ext > 512:
            raise ValueError(f"template {self.template_id!r} has a degenerate extremum structure")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.fn(np.mod(x, 1.0))
        return float(out) if out.ndim == 0 else out

    def derivative_sup_norms(self, resolution: float = 1e-4) -> tuple[float, float, float]:
        """Sup norms of f', f'', f''' over one period.

        Analytic derivatives are used when provided; otherwise central finite
        differences at the given resolution.
        """
        x = np.arange(0.0, 1.0, resolution)
        if self.derivs is not None:
            d1, d2, d3 = self.derivs
            return (
                float(np.max(np.abs(d1(x)))),
                float(np.max(np.abs(d2(x)))),
                float(np.max(np.abs(d3(x)))),
            )
        h = resolution
        f = self.__call__
        g1 = (f(x + h) - f(x - h)) / (2 * h)
        g2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        g3 = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
        return (float(np.max(np.abs(g1))), float(np.max(np.abs(g2))), float(np.max(np.abs(g3))))

    def to_json(self) -> str:
        return json.dumps({"template_id": self.template_id})


@dataclass(frozen=True)
class Reparam:
    """Piecewise-linear increasing bijection [0, 1] -> [0, N].

    ``knots`` are times in [0, 1] starting at 0 and ending at 1; ``images``
    their phases, starting at 0 and ending at ``n`` (whole wheel turns).
    """

    knots: np.ndarray
    images: np.ndarray
    n: int

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        im = np.asarray(self.images, dtype=float)
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "images", im)
        if len(k) != len(im) or len(k) < 2:
            raise ValueError("knots and images must have equal length >= 2")
        if not (np.all(np.diff(k) > 0) and np.all(np.diff(im) > 0)):
            raise ValueError("knots and images must be strictly increasing")
        if k[0] != 0.0 or k[-1] != 1.0 or im[0] != 0.0:
            raise ValueError("knots must span [0, 1] and images start at 0")
        if self.n < 1 or im[-1] != float(self.n):
            raise ValueError("images must end at the integer turn count n")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise ValueError("reparametrization argument outside [0, 1]")
        out = np.interp(t, self.knots, self.images)
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0.0) or np.any(y > self.images[-1]):
            raise ValueError("inverse argument outside [0, N]")
        out = np.interp(y, self.images, self.knots)
        return float(out) if out.ndim == 0 else out

    def to_json(self) -> str:
        return json.dumps({"knots": self.knots.tolist(), "images": self.images.tolist()})

    @staticmethod
    def from_json(text: str) -> "Reparam":
        doc = json.loads(text)
        images = doc["images"]
        return Reparam(np.asarray(doc["knots"]), np.asarray(images), int(round(images[-1])))


@dataclass(frozen=True)
class SmoothWarp:
    """Smooth increasing map t -> n*t + amplitude*sin(2*pi*t) on [0, 1].

    A three-times differentiable alternative to the piecewise-linear
    :class:`Reparam`, used where derivative sup norms are required.
    Requires ``2*pi*amplitude < n`` so the map stays increasing.
    """

    n: int
    amplitude: float = 0.1

    def __post_init__(self):
        if 2 * math.pi * abs(self.amplitude) >= self.n:
            raise ValueError("amplitude too large for a monotone warp")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.n * t + self.amplitude * np.sin(2 * np.pi * t)
        return float(out) if out.ndim == 0 else out

    def derivative_sup_norms(self) -> tuple[float, float, float]:
        a = abs(self.amplitude)
        return (
            self.n + 2 * math.pi * a,
            (2 * math.pi) ** 2 * a,
            (2 * math.pi) ** 3 * a,
        )


@dataclass(frozen=True)
class SamplingConfig:
    """Uniform sampling at frequency ``omega`` Hz; M = floor(omega) intervals."""

    omega: float

    def __post_init__(self):
        if self.omega < 1.0:
            raise ValueError("sampling frequency must be at least 1 Hz")

    @property
    def m(self) -> int:
        return int(math.floor(self.omega))

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.omega


def eval_template_composed(f: PeriodicTemplate, gamma: Reparam, grid) -> Signal:
    """Evaluate the composed signal f(gamma(t)) on a grid in [0, 1]."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ValueError("grid must lie within [0, 1]")
    return Signal(grid, f(gamma(grid)))


def sample_L(h, cfg: SamplingConfig) -> np.ndarray:
    """Sample an evaluable signal at m/omega for m = 0..M."""
    grid = cfg.grid
    return np.asarray(h(grid), dtype=float)


def interpolate_F(a, cfg: SamplingConfig) -> Signal:
    """Piecewise-linear interpolation of M+1 samples on the uniform grid."""
    a = np.asarray(a, dtype=float)
    if a.shape != (cfg.m + 1,):
        raise ValueError(f"expected {cfg.m + 1} samples, got {a.shape}")
    return Signal(cfg.grid, a)


def detrend_median(s: Signal, window_seconds: float) -> Signal:
    """Subtract a centered sliding-window median from a uniformly sampled signal.

    The window shrinks at the boundaries instead of padding.  The median of a
    window is its lower median (middle element of the sorted window), which
    makes the operation exactly translation-equivariant; interior windows have
    an odd sample count, where the lower median is the usual median.
    """
    if window_seconds <= 0:
        raise ValueError("window must be positive")
    dt = np.diff(s.times)
    step = dt.mean()
    if np.max(np.abs(dt - step)) / step > 1e-6:
        raise ValueError("detrend_median requires uniform sampling")
    half = int(math.floor(window_seconds / (2 * step)))
    if 2 * half + 1 < 3:
        raise ValueError("window must cover at least 3 samples")
    n = len(s)
    v = s.values
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        w = np.sort(v[lo:hi])
        out[i] = v[i] - w[(len(w) - 1) // 2]
    return Signal(s.times, out)


def random_reparam(n: int, rng_seed: int) -> Reparam:
    """Draw a random reparametrization with uniform period boundaries.

    Interior knots are sorted uniform draws on (0, 1) mapped to the integer
    phases 1..n-1.  For n = 1 a single interior knot with phase 1/2 is drawn,
    so the map is still random.  Collisions are resolved by resampling.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    rng = np.random.default_rng(rng_seed)
    interior = max(n - 1, 1)
    for _ in range(100):
        u = np.sort(rng.uniform(0.0, 1.0, size=interior))
        knots = np.concatenate([[0.0], u, [1.0]])
        if np.all(np.diff(knots) > 0):
            break
    else:  # pragma: no cover - probability zero
        raise RuntimeError("could not draw distinct knots")
    if n == 1:
        images = np.array([0.0, 0.5, 1.0])
    else:
        images = np.arange(n + 1, dtype=float)
    return Reparam(knots, images, n)


def _ternary_refine(f, lo: float, hi: float, minimize: bool, tol: float = 1e-11) -> float:
    sign = 1.0 if minimize else -1.0
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if sign * float(f(m1)) <= sign * float(f(m2)):
            hi = m2
        else:
            lo = m1
    return (lo + hi) / 2.0


def smooth_random_warp(n: int, rng_seed: int, knots: int = 4096) -> Reparam:
    """A smooth random reparametrization, as a dense piecewise-linear snapshot.

    The phase speed is 1 plus a few random low harmonics, bounded away from
    zero, which mimics a vehicle at smoothly varying speed: each period gets
    a comparable share of samples, unlike the uniform-period-starts draw
    whose shortest period shrinks like 1/n^2.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    rng = np.random.default_rng(rng_seed)
    amps = rng.uniform(0.0, 0.4, size=3) / np.arange(1, 4)
    phis = rng.uniform(0.0, 2 * np.pi, size=3)
    t = np.linspace(0.0, 1.0, knots + 1)
    phase = t.copy()
    for j, (a, phi) in enumerate(zip(amps, phis), start=1):
        phase = phase + a / (2 * np.pi * j) * (np.sin(2 * np.pi * j * t + phi) - np.sin(phi))
    images = n * phase
    images[0] = 0.0
    images[-1] = float(n)
    return Reparam(t, images, n)


def critical_points(
    f: PeriodicTemplate, kind: str = "min", resolution: float = 1e-4, refine: bool = True
):
    """Locations of local extrema of one period.

    Extrema are bracketed on a dense cyclic grid and, by default, refined by
    ternary search, so the reported phases are accurate well beyond the grid
    resolution (extremum values to near machine precision).

    Parameters
    ----------
    kind : {"min", "max", "all"}
        Which extrema to report.

    Returns
    -------
    ndarray
        Sorted phases in [0, 1) of the requested extrema.
    """
    g = int(round(1.0 / resolution))
    x = np.arange(g) / g
    v = f.fn(x)
    keep = np.concatenate([[True], np.diff(v) != 0])
    # collapse a plateau that wraps around the period boundary
    xs, vs = x[keep], v[keep]
    while len(vs) > 1 and vs[0] == vs[-1]:
        xs, vs = xs[:-1], vs[:-1]
    n = len(vs)
    if n == 1:
        return xs
    left = np.roll(vs, 1)
    right = np.roll(vs, -1)
    is_min = (vs < left) & (vs < right)
    is_max = (vs > left) & (vs > right)
    if kind == "min":
        mask = is_min
    elif kind == "max":
        mask = is_max
    elif kind == "all":
        mask = is_min | is_max
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if not refine:
        return np.sort(xs[mask])
    out = []
    for i in np.flatnonzero(mask):
        out.append(
            _ternary_refine(f, xs[i] - resolution, xs[i] + resolution, bool(is_min[i]))
        )
    return np.sort(np.mod(np.asarray(out), 1.0))


def period_aligned_grid(
    f: PeriodicTemplate, gamma: Reparam, per_period: int = 64
) -> np.ndarray:
    """A grid on [0, 1] containing the preimages of every extremum of f o gamma.

    The grid is the union of a uniform grid with ``per_period * n`` points and
    the preimages (under gamma) of all extremum phases in each period.  On such
    a grid the sampled signal attains every extremum exactly at a sample, so
    diagram multiplicities of the sampled composition agree with theory.
    """
    ext = critical_points(f, kind="all")
    phases = (ext[None, :] + np.arange(gamma.n)[:, None]).ravel()
    pre = gamma.inverse(np.sort(phases))
    base = np.linspace(0.0, 1.0, per_period * gamma.n + 1)
    grid = np.unique(np.concatenate([base, pre]))
    return grid


# --- built-in templates -----------------------------------------------------

def _rescaled(raw: Callable, grid: int = 1 << 18) -> Callable:
    x = np.arange(grid) / grid
    y = raw(x)
    lo, hi = float(np.min(y)), float(np.max(y))
    scale = 2.0 / (hi - lo)
    return lambda t: scale * (raw(t) - lo) - 1.0


def _f0(x):
    return np.sin(2 * np.pi * x)


_F0_DERIVS = (
    lambda x: 2 * np.pi * np.cos(2 * np.pi * x),
    lambda x: -((2 * np.pi) ** 2) * np.sin(2 * np.pi * x),
    lambda x: -((2 * np.pi) ** 3) * np.cos(2 * np.pi * x),
)

# f1: two extremum pairs per period; f2: three.  Harmonic amplitudes and
# phases are tuned so the diagram separation stays well away from zero
# (about 0.31 and 0.20 after rescaling to [-1, 1]).
_F1_RAW = lambda x: np.sin(2 * np.pi * x) + 0.9 * np.sin(4 * np.pi * x + 4.65)
_F2_RAW = lambda x: (
    np.sin(2 * np.pi * x)
    + 0.3 * np.sin(4 * np.pi * x)
    + 0.6 * np.sin(6 * np.pi * x + 1.0)
)

# f3: smoothed sawtooth, a monotone phase warp of the sine (one extremum pair,
# range exactly [-1, 1]).  f4: smoothed pulse, one narrow bump per period.
_F3 = lambda x: np.sin(2 * np.pi * (x + (0.8 / (2 * np.pi)) * np.sin(2 * np.pi * x)))
_F4_RAW = lambda x: np.exp(-3.0 * (1.0 - np.cos(2 * np.pi * x)))

BUILTIN_TEMPLATES: dict[str, PeriodicTemplate] = {
    "f0": PeriodicTemplate("f0", _f0, derivs=_F0_DERIVS),
    "f1": PeriodicTemplate("f1", _rescaled(_F1_RAW)),
    "f2": PeriodicTemplate("f2", _rescaled(_F2_RAW)),
    "f3": PeriodicTemplate("f3", _F3),
    "f4": PeriodicTemplate("f4", _rescaled(_F4_RAW)),
}


def get_template(template_id: str) -> PeriodicTemplate:
    try:
        return BUILTIN_TEMPLATES[template_id]
    except KeyError:
        raise KeyError(
            f"unknown template {template_id!r}; available: {sorted(BUILTIN_TEMPLATES)}"
        ) from None


# --- CSV I/O -----------------------------------------------------------------

def write_signal_csv(s: Signal, path) -> None:
    """Write a signal as `t,value` CSV with LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(s.times, s.values):
            w.writerow([repr(float(t)), repr(float(v))])


def read_signal_csv(path) -> Signal:
    """Read a `t,value` CSV; raises :class:`CsvFormatError` with the line number."""
    times, values = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["t", "value"]:
            raise CsvFormatError(1, "expected header 't,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise CsvFormatError(lineno, f"expected 2 columns, got {len(row)}")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError:
                raise CsvFormatError(lineno, f"non-numeric row {row!r}") from None
    if len(times) < 2:
        raise CsvFormatError(1, "signal needs at least two samples")
    return Signal(np.asarray(times), np.asarray(values))
