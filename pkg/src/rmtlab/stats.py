"""Binomial confidence intervals shared by the Monte Carlo estimators."""
from __future__ import annotations

import numpy as np

Z95 = 1.959963984540054


def wilson_interval(successes, trials, z: float = Z95):
    """Wilson score interval for a binomial proportion.

    Vectorized over ``successes``; returns ``(lo, hi)`` arrays (or floats for
    scalar input).  Unlike the Wald interval it stays inside [0, 1] and is
    sensible when the count is zero.
    """
    k = np.asarray(successes, dtype=float)
    n = np.asarray(trials, dtype=float)
    if np.any(n <= 0):
        raise ValueError("trials must be positive")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    lo = np.clip(center - half, 0.0, 1.0)
    hi = np.clip(center + half, 0.0, 1.0)
    # the interval always contains the point estimate, rounding aside
    lo = np.minimum(lo, p)
    hi = np.maximum(hi, p)
    if lo.ndim == 0:
        return float(lo), float(hi)
    return lo, hi


def dkw_halfwidth(trials: int, level: float = 0.95) -> float:
    """Simultaneous band half-width for an empirical CDF (Dvoretzky-Kiefer-Wolfowitz)."""
    return float(np.sqrt(np.log(2.0 / (1.0 - level)) / (2.0 * trials)))
