"""Core types and evaluation machinery.

The whole package works with one closed form: finite signed mixtures

    f(z) = sum_i  c_i * z^{k_i} * exp(-lambda_i * z),   z >= 0,

with possibly negative coefficients.  Sums of independent exponentials,
minima, maxima and ranges all land in this family, so the mixture type
carries the shared evaluation, integration, cdf, quantile and moment
machinery.  Signed coefficients of alternating sign are the central
numerical hazard; every scalar reduction here therefore goes through
compensated summation (math.fsum, an error-free transformation), and
near-equal rates are grouped into clusters before any coefficient with a
(lambda_j - lambda_n) denominator is formed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import factorial, gammainc

from .errors import ContractError, DomainError, NumericalError

logger = logging.getLogger(__name__)

# Below this relative gap the coefficients lambda_j/(lambda_j - lambda_n)
# exceed ~1e9 and double precision has lost all signal; merging to an exact
# Erlang block is strictly more accurate than keeping the rates distinct.
DEFAULT_CLUSTER_TOLERANCE = 1e-9

# Relative tolerance for merging mixture terms with coinciding rates, e.g.
# subset sums 1+2 and 3 that agree only up to the last ulp.
TERM_MERGE_TOLERANCE = 1e-12

# cdf values may round to just outside [0,1]; clamping inside this window is
# routine (logged at debug), beyond it the overshoot is reported loudly.
CDF_CLAMP_WINDOW = 1e-12

# Quantile bracket: mean + 40 standard deviations covers p <= 1 - 1e-12 for
# every exponential mixture at desk scale.
QUANTILE_BRACKET_SIGMAS = 40.0


# ---------------------------------------------------------------------------
# rate vectors


@dataclass(frozen=True)
class RateVector:
    """Validated vector of positive rates with near-equal-rate clustering.

    Clustering is canonical: indices are sorted by rate and greedily merged
    while the relative difference to the current cluster anchor stays within
    ``cluster_tolerance``, so permuting the input produces identical clusters.

    Attributes:
        rates: the rates in input order, each finite and strictly positive.
        cluster_tolerance: relative tolerance for grouping near-equal rates.
        clusters: partition of indices 0..N-1 into groups of near-equal rates,
            ordered by increasing rate.
    """

    rates: tuple[float, ...]
    cluster_tolerance: float = DEFAULT_CLUSTER_TOLERANCE
    clusters: tuple[tuple[int, ...], ...] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        rates = tuple(float(r) for r in self.rates)
        if len(rates) == 0:
            raise DomainError("rate vector must be non-empty")
        for r in rates:
            if not math.isfinite(r) or r <= 0.0:
                raise DomainError(f"rates must be finite and positive, got {r!r}")
        tol = float(self.cluster_tolerance)
        if not (0.0 <= tol < 0.5):
            raise DomainError(f"cluster_tolerance must lie in [0, 0.5), got {tol!r}")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "cluster_tolerance", tol)
        object.__setattr__(self, "clusters", self._cluster(rates, tol))

    @staticmethod
    def _cluster(rates: tuple[float, ...], tol: float) -> tuple[tuple[int, ...], ...]:
        order = sorted(range(len(rates)), key=lambda i: (rates[i], i))
        groups: list[list[int]] = []
        anchor = -math.inf
        for idx in order:
            r = rates[idx]
            if not groups or (r - anchor) > tol * r:
                groups.append([idx])
                anchor = r
            else:
                groups[-1].append(idx)
        return tuple(tuple(sorted(g)) for g in groups)

    def __len__(self) -> int:
        return len(self.rates)

    def __iter__(self):
        return iter(self.rates)

    @property
    def n(self) -> int:
        return len(self.rates)

    @property
    def total(self) -> float:
        """Sum of all rates (the rate of the minimum)."""
        return math.fsum(self.rates)

    @property
    def is_distinct(self) -> bool:
        """True when every cluster is a singleton."""
        return all(len(g) == 1 for g in self.clusters)

    @property
    def cluster_rates(self) -> tuple[float, ...]:
        """Representative (mean) rate per cluster, in increasing order."""
        return tuple(math.fsum(self.rates[i] for i in g) / len(g) for g in self.clusters)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.clusters)

    @property
    def min_cross_cluster_gap(self) -> float:
        """Smallest relative gap between adjacent cluster rates (inf if one cluster)."""
        reps = self.cluster_rates
        if len(reps) < 2:
            return math.inf
        return min((b - a) / b for a, b in zip(reps, reps[1:]))


RatesLike = Union[RateVector, Sequence[float]]


def as_rate_vector(rates: RatesLike) -> RateVector:
    """Coerce a sequence of rates into a RateVector (pass-through if already one)."""
    if isinstance(rates, RateVector):
        return rates
    return RateVector(tuple(float(r) for r in rates))


# ---------------------------------------------------------------------------
# exponential law


@dataclass(frozen=True)
class ExponentialLaw:
    """Exponential distribution with density rate * exp(-rate * x) on x >= 0."""

    rate: float

    def __post_init__(self) -> None:
        r = float(self.rate)
        if not math.isfinite(r) or r <= 0.0:
            raise DomainError(f"rate must be finite and positive, got {r!r}")
        object.__setattr__(self, "rate", r)


def exp_pdf(law: ExponentialLaw, x: float) -> float:
    """Density rate * exp(-rate * x); raises DomainError for x < 0."""
    if x < 0.0:
        raise DomainError(f"pdf argument must be non-negative, got {x!r}")
    return law.rate * math.exp(-law.rate * x)


def exp_cdf(law: ExponentialLaw, x: float) -> float:
    """Distribution function 1 - exp(-rate * x), via expm1 to avoid cancellation."""
    if x < 0.0:
        raise DomainError(f"cdf argument must be non-negative, got {x!r}")
    return -math.expm1(-law.rate * x)


def exp_sample(law: ExponentialLaw, rng_stream: np.random.Generator) -> float:
    """One inverse-transform draw -ln(U)/rate, U uniform on (0,1).

    Consumes exactly one uniform from the stream (a zero uniform, probability
    2**-53, is redrawn so the result is always positive and finite).
    """
    u = rng_stream.random()
    while u == 0.0:  # pragma: no cover - probability 2**-53
        u = rng_stream.random()
    return -math.log(u) / law.rate


# ---------------------------------------------------------------------------
# signed exponential mixtures


class MixtureTerm(NamedTuple):
    coefficient: float
    rate: float
    degree: int


def _canonicalize(
    coefficients: np.ndarray, rates: np.ndarray, degrees: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sort by (rate, degree), merge terms whose rate and degree coincide.

    Rates are considered equal within TERM_MERGE_TOLERANCE relative, so subset
    sums that differ only in the last ulp collapse to one term.  The merged
    term keeps the smallest rate of its group; exact-zero coefficients are
    dropped.
    """
    if coefficients.size == 0:
        return coefficients, rates, degrees
    # merge pass grouped by (degree, rate) so rate-adjacency is within a degree
    order = np.lexsort((rates, degrees))
    c, r, d = coefficients[order], rates[order], degrees[order]
    gap = (r[1:] - r[:-1]) > TERM_MERGE_TOLERANCE * np.maximum(r[1:], r[:-1])
    new_group = gap | (d[1:] != d[:-1])
    starts = np.concatenate(([0], np.nonzero(new_group)[0] + 1))
    c = np.add.reduceat(c, starts)
    r = r[starts]
    d = d[starts]
    keep = c != 0.0
    c, r, d = c[keep], r[keep], d[keep]
    order = np.lexsort((d, r))
    return c[order], r[order], d[order]


@dataclass(frozen=True, eq=False)
class SignedExponentialMixture:
    """Finite signed mixture sum_i c_i * z^{k_i} * exp(-rate_i * z) on z >= 0.

    Terms are stored canonically: sorted by (rate, degree), duplicates merged,
    zero coefficients dropped.  ``is_density`` asserts that the mixture is a
    probability density (non-negative, unit integral); cdf and quantile
    operations require the flag.  Instances are immutable.
    """

    coefficients: np.ndarray
    rates: np.ndarray
    degrees: np.ndarray
    is_density: bool = False

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.coefficients, dtype=np.float64)
        r = np.ascontiguousarray(self.rates, dtype=np.float64)
        d = np.ascontiguousarray(self.degrees, dtype=np.int64)
        if not (c.shape == r.shape == d.shape) or c.ndim != 1:
            raise DomainError("coefficients, rates and degrees must be 1-d and equal length")
        if not np.all(np.isfinite(c)):
            raise DomainError("mixture coefficients must be finite")
        if r.size and (not np.all(np.isfinite(r)) or np.any(r <= 0.0)):
            raise DomainError("mixture rates must be finite and positive")
        if np.any(d < 0):
            raise DomainError("mixture degrees must be non-negative")
        c, r, d = _canonicalize(c, r, d)
        for arr in (c, r, d):
            arr.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "degrees", d)

    @classmethod
    def from_terms(
        cls, terms: Iterable[tuple[float, float, int]], is_density: bool = False
    ) -> "SignedExponentialMixture":
        """Build from (coefficient, rate, degree) triples."""
        triples = list(terms)
        c = np.array([t[0] for t in triples], dtype=np.float64)
        r = np.array([t[1] for t in triples], dtype=np.float64)
        d = np.array([t[2] for t in triples], dtype=np.int64)
        return cls(c, r, d, is_density=is_density)

    @property
    def n_terms(self) -> int:
        return int(self.coefficients.size)

    @property
    def terms(self) -> tuple[MixtureTerm, ...]:
        """Canonical terms as named tuples (intended for small mixtures)."""
        return tuple(
            MixtureTerm(float(c), float(r), int(d))
            for c, r, d in zip(self.coefficients, self.rates, self.degrees)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedExponentialMixture):
            return NotImplemented
        return (
            self.is_density == other.is_density
            and self.coefficients.shape == other.coefficients.shape
            and bool(np.all(self.coefficients == other.coefficients))
            and bool(np.all(self.rates == other.rates))
            and bool(np.all(self.degrees == other.degrees))
        )

    def __repr__(self) -> str:
        if self.n_terms <= 6:
            body = ", ".join(
                f"({c:.6g}, {r:.6g}, {d})"
                for c, r, d in zip(self.coefficients, self.rates, self.degrees)
            )
        else:
            body = f"<{self.n_terms} terms>"
        return f"SignedExponentialMixture([{body}], is_density={self.is_density})"

    def scaled(self, factor: float) -> "SignedExponentialMixture":
        """Mixture with all coefficients multiplied by ``factor`` (drops density flag)."""
        return SignedExponentialMixture(
            self.coefficients * factor, self.rates, self.degrees, is_density=False
        )


def mixture_sum(
    parts: Iterable[SignedExponentialMixture], is_density: bool = False
) -> SignedExponentialMixture:
    """Termwise sum of mixtures, canonicalized."""
    parts = list(parts)
    return SignedExponentialMixture(
        np.concatenate([p.coefficients for p in parts]),
        np.concatenate([p.rates for p in parts]),
        np.concatenate([p.degrees for p in parts]),
        is_density=is_density,
    )


def _require_density(m: SignedExponentialMixture, op: str) -> None:
    if not m.is_density:
        raise ContractError(f"{op} requires a mixture flagged as a probability density")


def mixture_eval(m: SignedExponentialMixture, z: float) -> float:
    """Evaluate the mixture at a scalar z >= 0.

    Term values are accumulated in descending magnitude with compensated
    summation, so alternating-sign cancellation costs no more than the
    rounding already present in the individual terms.
    """
    if z < 0.0:
        raise DomainError(f"mixture argument must be non-negative, got {z!r}")
    if m.n_terms == 0:
        return 0.0
    vals = m.coefficients * np.power(z, m.degrees) * np.exp(-m.rates * z)
    vals = vals[np.argsort(np.abs(vals))[::-1]]
    return math.fsum(vals)


def mixture_eval_grid(m: SignedExponentialMixture, z: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over a grid of non-negative points.

    Uses numpy pairwise summation over terms; for severely ill-conditioned
    mixtures prefer the scalar mixture_eval, which is fully compensated.
    """
    zz = np.asarray(z, dtype=np.float64)
    if np.any(zz < 0.0):
        raise DomainError("mixture arguments must be non-negative")
    if m.n_terms == 0:
        return np.zeros_like(zz)
    c = m.coefficients[:, None]
    lam = m.rates[:, None]
    k = m.degrees[:, None]
    return np.sum(c * np.power(zz[None, :], k) * np.exp(-lam * zz[None, :]), axis=0)


def mixture_integral(m: SignedExponentialMixture) -> float:
    """Exact integral over [0, inf): sum_i c_i * k_i! / rate_i^(k_i+1)."""
    if m.n_terms == 0:
        return 0.0
    vals = m.coefficients * factorial(m.degrees) / m.rates ** (m.degrees + 1)
    return math.fsum(vals[np.argsort(np.abs(vals))[::-1]])


def _cdf_raw(m: SignedExponentialMixture, z: float) -> float:
    # termwise antiderivative: degree 0 exactly via expm1, degree >= 1 via the
    # regularized lower incomplete gamma
    vals = np.empty(m.n_terms)
    flat = m.degrees == 0
    if np.any(flat):
        c = m.coefficients[flat]
        lam = m.rates[flat]
        vals[flat] = -(c / lam) * np.expm1(-lam * z)
    if not np.all(flat):
        c = m.coefficients[~flat]
        lam = m.rates[~flat]
        k = m.degrees[~flat]
        vals[~flat] = c * factorial(k) / lam ** (k + 1) * gammainc(k + 1, lam * z)
    vals = vals[np.argsort(np.abs(vals))[::-1]]
    return math.fsum(vals)


def _clamp_unit(value: float, where: str) -> float:
    if value < 0.0:
        if value < -CDF_CLAMP_WINDOW:
            logger.warning("%s: clamping %r to 0 (beyond the %g window)", where, value, CDF_CLAMP_WINDOW)
        else:
            logger.debug("%s: clamping %r to 0", where, value)
        return 0.0
    if value > 1.0:
        if value > 1.0 + CDF_CLAMP_WINDOW:
            logger.warning("%s: clamping %r to 1 (beyond the %g window)", where, value, CDF_CLAMP_WINDOW)
        else:
            logger.debug("%s: clamping %r to 1", where, value)
        return 1.0
    return value


def mixture_cdf(m: SignedExponentialMixture, z: float) -> float:
    """Distribution function of a density mixture at scalar z >= 0.

    Returned values are clamped into [0, 1]; overshoot beyond 1e-12 is logged
    as a warning rather than silently absorbed.
    """
    _require_density(m, "mixture_cdf")
    if z < 0.0:
        raise DomainError(f"cdf argument must be non-negative, got {z!r}")
    return _clamp_unit(_cdf_raw(m, z), "mixture_cdf")


def mixture_cdf_grid(m: SignedExponentialMixture, z: np.ndarray) -> np.ndarray:
    """Vectorized cdf over a grid (same termwise antiderivative as mixture_cdf)."""
    _require_density(m, "mixture_cdf")
    zz = np.asarray(z, dtype=np.float64)
    if np.any(zz < 0.0):
        raise DomainError("cdf arguments must be non-negative")
    c = m.coefficients[:, None]
    lam = m.rates[:, None]
    k = m.degrees[:, None]
    x = lam * zz[None, :]
    flat = m.degrees == 0
    contrib = np.where(
        flat[:, None],
        -(c / lam) * np.expm1(-x),
        c * factorial(k) / lam ** (k + 1) * gammainc(k + 1, x),
    )
    return np.clip(np.sum(contrib, axis=0), 0.0, 1.0)


def mixture_moment(m: SignedExponentialMixture, order: int) -> float:
    """Raw moment of order 1 or 2: sum_i c_i * (k_i+order)! / rate_i^(k_i+order+1)."""
    if order not in (1, 2):
        raise DomainError(f"moment order must be 1 or 2, got {order!r}")
    vals = m.coefficients * factorial(m.degrees + order) / m.rates ** (m.degrees + order + 1)
    return math.fsum(vals[np.argsort(np.abs(vals))[::-1]])


def mixture_quantile(m: SignedExponentialMixture, p: float) -> float:
    """Inverse cdf of a density mixture.

    Brackets the root on [0, mean + 40 sigma] (expanding in the extreme upper
    tail) and solves with a safeguarded bracketing root finder to a cdf
    residual of at most 1e-10.
    """
    _require_density(m, "mixture_quantile")
    if not (0.0 < p < 1.0):
        raise DomainError(f"quantile level must lie strictly in (0,1), got {p!r}")
    mean = mixture_moment(m, 1)
    var = max(mixture_moment(m, 2) - mean * mean, 0.0)
    hi = mean + QUANTILE_BRACKET_SIGMAS * math.sqrt(var)
    for _ in range(200):
        if _cdf_raw(m, hi) >= p:
            break
        hi *= 1.5
    else:  # pragma: no cover - unreachable for genuine densities
        raise NumericalError(f"failed to bracket quantile level {p}")
    root = brentq(lambda t: _cdf_raw(m, t) - p, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = abs(_cdf_raw(m, root) - p)
    if residual > 1e-10:
        raise NumericalError(f"quantile residual {residual:.3e} exceeds 1e-10 at p={p}")
    return float(root)
