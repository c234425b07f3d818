"""Shared test harness: random signals, noisy composition trials, oracles."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from periodica import (
    GPConfig,
    Signal,
    clipped_gp,
    diagram_circle,
    eval_template_composed,
    get_template,
    random_reparam,
    separation_delta,
    to_measure,
)
from periodica.signal import period_aligned_grid

GROUP_TOL = 1e-9  # grouping tolerance absorbing float jitter across periods


def random_signal(rng, max_len: int = 50, min_len: int = 2, quantized: bool = False) -> Signal:
    """A random test signal; quantized values exercise plateaus and ties."""
    n = int(rng.integers(min_len, max_len + 1))
    if quantized:
        vals = rng.integers(0, 6, size=n).astype(float)
    else:
        vals = rng.uniform(-1.0, 1.0, size=n)
    return Signal(np.arange(n, dtype=float), vals)


@lru_cache(maxsize=None)
def one_period_measure(template_id: str, grid: int = 4096):
    f = get_template(template_id)
    x = np.linspace(0.0, 1.0, grid + 1)
    return to_measure(diagram_circle(Signal(x, f(x))), GROUP_TOL)


@lru_cache(maxsize=None)
def template_delta(template_id: str) -> float:
    return separation_delta(one_period_measure(template_id))


def interp_noise(grid, sigma: float, l: float, eps: float, seed: int, noise_grid: int = 400):
    """A bounded noise path: clipped GP on a coarse grid, PL-interpolated.

    Linear interpolation cannot increase the sup norm, so the result still
    satisfies ||w||_inf < eps while keeping the dense factorization cheap.
    """
    coarse = np.linspace(grid[0], grid[-1], noise_grid)
    w = clipped_gp(coarse, GPConfig(sigma, l, seed), eps)
    return np.interp(grid, coarse, w)


def noisy_circle_trial(
    template_id: str,
    n: int,
    seed: int,
    eps_frac: float = 0.85,
    per_period: int = 150,
):
    """One bounded-noise trial satisfying the stability hypotheses.

    Builds S = f(gamma(t)) + W on an extremum-aligned grid with
    ||W||_inf < eps = eps_frac * delta / 6 and W pinned at the seam so the
    signal closes up on the circle.  Returns (signal, gamma, delta, eps).
    """
    f = get_template(template_id)
    delta = template_delta(template_id)
    eps = eps_frac * delta / 6.0
    gamma = random_reparam(n, seed)
    grid = period_aligned_grid(f, gamma, per_period)
    clean = eval_template_composed(f, gamma, grid)
    sigma = eps / 3.0
    w = interp_noise(grid, sigma, 0.15, eps, seed + 1)
    w[-1] = w[0]
    return Signal(grid, clean.values + w), gamma, delta, eps
