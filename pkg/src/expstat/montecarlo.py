"""Seeded sampling harness and statistical oracles.

Streams are counter-based (Philox) and separated through SeedSequence spawn
keys, so (seed, stream_id) fully determines a batch and distinct stream ids
are statistically independent.  Batch draws use the inverse transform
-log(1 - U)/rate with one uniform per variable, consumed in replication-major
order; reruns with the same (seed, stream_id, count) are bit-identical.

The goodness-of-fit side provides the one-sample Kolmogorov-Smirnov test at
the asymptotic 1% level and an empirical independence (factorization) check
of a joint sample against the product of its marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RatesLike, as_rate_vector
from .errors import ContractError, DomainError
from .orderstats import OrderStatisticRequest, order_statistic_sample

# Asymptotic one-sample KS critical constant at level alpha = 0.01, valid
# for n > 35 (all shipped tests use n >= 1e4).
KS_CONSTANT_ALPHA_01 = 1.628

# The factorization statistic compares an empirical joint cdf with the
# product of empirical marginals; three KS half-widths is a conservative
# bound for the null at the grid resolutions used here.
FACTORIZATION_BOUND_MULTIPLE = 3.0


def make_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, stream_id); distinct ids are disjoint."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Monte Carlo draws with their provenance (seed, stream id, count)."""

    values: np.ndarray
    seed: int
    stream_id: int
    count: int

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size != self.count:
            raise ContractError(
                f"batch length {v.size} does not match declared count {self.count}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class GoodnessOfFitReport:
    """One-sample KS result at level alpha = 0.01; passed iff statistic < critical."""

    ks_statistic: float
    n: int
    critical_value: float
    passed: bool

    def __post_init__(self) -> None:
        if self.passed != (self.ks_statistic < self.critical_value):
            raise ContractError("pass flag inconsistent with statistic and critical value")


@dataclass(frozen=True)
class FactorizationReport:
    """Max deviation between joint and product-of-marginal empirical cdfs."""

    max_deviation: float
    bound: float
    n: int
    grid_size: int
    passed: bool

    def __post_init__(self) -> None:
        if self.passed != (self.max_deviation <= self.bound):
            raise ContractError("pass flag inconsistent with deviation and bound")


def _draw_matrix(rv, count: int, rng: np.random.Generator) -> np.ndarray:
    # one uniform per variable, replication-major; 1-U keeps the log argument
    # in (0, 1] so draws are finite
    u = rng.random((count, rv.n))
    return -np.log1p(-u) / np.asarray(rv.rates)[None, :]


def _validated_count(count: int) -> int:
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    return count


def sample_sum(rates: RatesLike, count: int, seed: int, stream_id: int = 0) -> SampleBatch:
    """iid draws of the sum of the component variables."""
    rv = as_rate_vector(rates)
    count = _validated_count(count)
    rng = make_stream(seed, stream_id)
    values = _draw_matrix(rv, count, rng).sum(axis=1)
    return SampleBatch(values, int(seed), int(stream_id), count)


def sample_min(rates: RatesLike, count: int, seed: int, stream_id: int = 0) -> SampleBatch:
    """iid draws of the minimum."""
    rv = as_rate_vector(rates)
    count = _validated_count(count)
    rng = make_stream(seed, stream_id)
    values = _draw_matrix(rv, count, rng).min(axis=1)
    return SampleBatch(values, int(seed), int(stream_id), count)


def sample_max(rates: RatesLike, count: int, seed: int, stream_id: int = 0) -> SampleBatch:
    """iid draws of the maximum."""
    rv = as_rate_vector(rates)
    count = _validated_count(count)
    rng = make_stream(seed, stream_id)
    values = _draw_matrix(rv, count, rng).max(axis=1)
    return SampleBatch(values, int(seed), int(stream_id), count)


def sample_order(
    rates: RatesLike, r: int, count: int, seed: int, stream_id: int = 0
) -> SampleBatch:
    """iid draws of the r-th order statistic via the sequential-spacing sampler."""
    rv = as_rate_vector(rates)
    count = _validated_count(count)
    req = OrderStatisticRequest(rv, r)
    rng = make_stream(seed, stream_id)
    values = np.fromiter(
        (order_statistic_sample(req, rng) for _ in range(count)), dtype=np.float64, count=count
    )
    return SampleBatch(values, int(seed), int(stream_id), count)


def sample_min_range_pairs(
    rate_1: float, rate_2: float, count: int, seed: int, stream_id: int = 0
) -> np.ndarray:
    """(count, 2) array of (min, max - min) pairs for two independent variables."""
    rv = as_rate_vector((rate_1, rate_2))
    count = _validated_count(count)
    rng = make_stream(seed, stream_id)
    x = _draw_matrix(rv, count, rng)
    lo = x.min(axis=1)
    hi = x.max(axis=1)
    return np.column_stack((lo, hi - lo))


def ks_test(batch: SampleBatch, cdf) -> GoodnessOfFitReport:
    """One-sample Kolmogorov-Smirnov test of a batch against a reference cdf.

    ``cdf`` may be scalar or vectorized over numpy arrays.  Raises
    ContractError if the probe values are non-monotone or outside [0, 1].
    """
    x = np.sort(batch.values)
    n = x.size
    if n == 0:
        raise DomainError("KS test requires a non-empty batch")
    try:
        f = np.asarray(cdf(x), dtype=np.float64)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([float(cdf(v)) for v in x])
    if np.any(np.diff(f) < -1e-12):
        raise ContractError("reference cdf is not monotone on the sample")
    if np.any(f < -1e-12) or np.any(f > 1.0 + 1e-12):
        raise ContractError("reference cdf leaves [0, 1] on the sample")
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1.0) / n))
    ks = max(d_plus, d_minus, 0.0)
    critical = KS_CONSTANT_ALPHA_01 / math.sqrt(n)
    return GoodnessOfFitReport(ks, n, critical, ks < critical)


def factorization_test(pairs, grid_size: int = 10) -> FactorizationReport:
    """Empirical independence check of paired samples.

    Compares the joint empirical cdf with the product of the marginal
    empirical cdfs on a grid of marginal quantiles; the pair passes when the
    max deviation stays within three KS half-widths of zero.
    """
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("pairs must be an (n, 2) array")
    n = arr.shape[0]
    if n < 10_000:
        raise DomainError(f"factorization test needs at least 1e4 pairs, got {n}")
    m = int(grid_size)
    if m < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")
    qs = np.arange(1, m + 1) / (m + 1)
    u_thr = np.quantile(arr[:, 0], qs)
    v_thr = np.quantile(arr[:, 1], qs)
    # cell counts, then a 2-d cumulative sum gives joint cdf values at the
    # thresholds; the last row/column hold the marginals
    bu = np.searchsorted(u_thr, arr[:, 0], side="left")
    bv = np.searchsorted(v_thr, arr[:, 1], side="left")
    counts = np.zeros((m + 1, m + 1))
    np.add.at(counts, (bu, bv), 1.0)
    cum = counts.cumsum(axis=0).cumsum(axis=1)
    joint = cum[:m, :m] / n
    f_u = cum[:m, m] / n
    g_v = cum[m, :m] / n
    deviation = float(np.max(np.abs(joint - np.outer(f_u, g_v))))
    bound = FACTORIZATION_BOUND_MULTIPLE * KS_CONSTANT_ALPHA_01 / math.sqrt(n)
    return FactorizationReport(deviation, bound, n, m, deviation <= bound)
