"""Shared test helpers: seeded rate-set generators and grid builders."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from expstat import conv_quantile


def random_rate_sets(
    seed: int,
    n_sets: int,
    n_min: int = 2,
    n_max: int = 8,
    low: float = 1e-2,
    high: float = 1e2,
    min_gap: float = 1e-3,
) -> list[tuple[float, ...]]:
    """Log-uniform random rate sets with a minimum relative gap, reproducible."""
    rng = np.random.default_rng(seed)
    sets: list[tuple[float, ...]] = []
    while len(sets) < n_sets:
        n = int(rng.integers(n_min, n_max + 1))
        r = np.exp(rng.uniform(np.log(low), np.log(high), size=n))
        r.sort()
        if n == 1 or float(np.min((r[1:] - r[:-1]) / r[1:])) > min_gap:
            sets.append(tuple(float(x) for x in r))
    return sets


def quantile_grid(rates, n_points: int = 20, p_lo: float = 0.02, p_hi: float = 0.98) -> np.ndarray:
    """Evaluation points at sum-law quantiles, away from the deep tails."""
    return np.array([conv_quantile(rates, p) for p in np.linspace(p_lo, p_hi, n_points)])


def rate_strategy(min_size: int = 1, max_size: int = 8):
    """Hypothesis strategy for plain positive rate lists."""
    return st.lists(
        st.floats(min_value=0.01, max_value=100.0, allow_nan=False, allow_infinity=False),
        min_size=min_size,
        max_size=max_size,
    )


def _min_relative_gap(values: list[float]) -> float:
    ordered = sorted(values)
    if len(ordered) < 2:
        return float("inf")
    return min((b - a) / b for a, b in zip(ordered, ordered[1:]))


def separated_rate_strategy(min_size: int = 2, max_size: int = 8, min_gap: float = 1e-3):
    """Rate lists whose sorted entries are separated by a relative gap."""
    return rate_strategy(min_size, max_size).filter(lambda r: _min_relative_gap(r) > min_gap)
