"""Distribution of the sum of independent heterogeneous exponentials.

For pairwise-distinct rates the density has the closed form

    f(z) = sum_n A_n * lambda_n * exp(-lambda_n z),
    A_n  = prod_{j != n} lambda_j / (lambda_j - lambda_n),

a signed combination whose coefficients blow up as rates approach each
other.  Three evaluation paths keep this stable everywhere:

* distinct, well-separated rates: the closed form above;
* rates equal within the cluster tolerance: exact Erlang blocks from a
  confluent partial-fraction expansion (degree >= 1 terms);
* distinct but closer than ``SWITCH_THRESHOLD``: a phase-type evaluation
  (matrix exponential of the bidiagonal sub-generator), which is accurate
  independently of the rate gaps.

The characteristic-function identities and the partial-fraction residual
check provide cheap internal consistency tests of the same coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .core import (
    QUANTILE_BRACKET_SIGMAS,
    RatesLike,
    RateVector,
    SignedExponentialMixture,
    _clamp_unit,
    as_rate_vector,
    mixture_cdf,
    mixture_eval,
    mixture_eval_grid,
    mixture_quantile,
)
from .errors import DegenerateRatesError, DomainError, NumericalError

# Minimal cross-cluster relative gap below which the signed closed form has
# lost roughly ten digits (N ~ 8) and evaluation is delegated to the
# phase-type path instead.
SWITCH_THRESHOLD = 1e-3

# Above this size the coefficient products are formed in log space with the
# sign tracked separately, to dodge intermediate overflow.
_LOG_SPACE_SIZE = 20

_LOG_DOUBLE_MAX = math.log(np.finfo(np.float64).max)


# ---------------------------------------------------------------------------
# partial-fraction coefficients


@dataclass(frozen=True)
class ConvolutionCoefficients:
    """Coefficients A_n of the distinct-rate closed form, one per rate.

    ``condition_estimate`` (max |A_n|) measures how much alternating-sign
    cancellation the closed form incurs; identity residuals scale with it.
    """

    rates: tuple[float, ...]
    coefficients: tuple[float, ...]

    @property
    def condition_estimate(self) -> float:
        return max(abs(a) for a in self.coefficients)


def conv_coefficients(rates: RatesLike) -> ConvolutionCoefficients:
    """A_n = prod_{j != n} lambda_j / (lambda_j - lambda_n) for distinct rates.

    Raises DegenerateRatesError when any rates cluster together; repeated
    rates are handled by conv_mixture / conv_pdf, which build Erlang blocks
    instead of these coefficients.
    """
    rv = as_rate_vector(rates)
    if not rv.is_distinct:
        raise DegenerateRatesError(
            "partial-fraction coefficients need pairwise-distinct rates; "
            "use conv_pdf/conv_mixture, which handle clustered rates"
        )
    lam = rv.rates
    n = len(lam)
    if n <= _LOG_SPACE_SIZE:
        coeffs = []
        for i, ln in enumerate(lam):
            prod = 1.0
            for j, lj in enumerate(lam):
                if j != i:
                    prod *= lj / (lj - ln)
            coeffs.append(prod)
    else:
        coeffs = []
        for i, ln in enumerate(lam):
            sign = 1.0 if sum(1 for lj in lam if lj < ln) % 2 == 0 else -1.0
            log_mag = math.fsum(
                math.log(lj) - math.log(abs(lj - ln)) for j, lj in enumerate(lam) if j != i
            )
            if log_mag > _LOG_DOUBLE_MAX:
                raise NumericalError(
                    f"coefficient magnitude exp({log_mag:.1f}) overflows double "
                    f"precision at rate index {i}"
                )
            coeffs.append(sign * math.exp(log_mag))
    return ConvolutionCoefficients(rates=lam, coefficients=tuple(coeffs))


# ---------------------------------------------------------------------------
# confluent (repeated-rate) expansion

def _confluent_terms(mu: tuple[float, ...], mult: tuple[int, ...]) -> list[tuple[float, float, int]]:
    """Mixture terms of the sum density for cluster rates mu with multiplicities.

    The Laplace transform is C * prod_g (s + mu_g)^{-m_g} with
    C = prod mu_g^{m_g}.  Expanding in partial fractions with repeated poles,

        prod_g (s+mu_g)^{-m_g} = sum_g sum_{k=1}^{m_g} a_{g,k} (s+mu_g)^{-k},
        a_{g,k} = phi_g^{(m_g-k)}(-mu_g) / (m_g-k)!,
        phi_g(s) = prod_{h != g} (s+mu_h)^{-m_h},

    and inverting (s+mu)^{-k} to z^{k-1} e^{-mu z}/(k-1)! gives terms
    (C a_{g,k}/(k-1)!, mu_g, k-1).  Derivatives of phi_g = exp(psi_g) follow
    the Leibniz recurrence with the explicit log-derivatives

        psi_g^{(j)}(-mu_g) = (-1)^j (j-1)! sum_{h != g} m_h (mu_h-mu_g)^{-j}.
    """
    c_total = 1.0
    for m, k in zip(mu, mult):
        c_total *= m**k
    terms: list[tuple[float, float, int]] = []
    for g, (mu_g, m_g) in enumerate(zip(mu, mult)):
        psi = [0.0] * m_g  # psi[j] = psi_g^(j)(-mu_g), j >= 1 used
        for j in range(1, m_g):
            s = math.fsum(
                mult[h] / (mu[h] - mu_g) ** j for h in range(len(mu)) if h != g
            )
            psi[j] = (-1.0) ** j * math.factorial(j - 1) * s
        phi = [0.0] * m_g
        phi[0] = math.prod(
            (mu[h] - mu_g) ** (-mult[h]) for h in range(len(mu)) if h != g
        )
        for r in range(1, m_g):
            phi[r] = math.fsum(
                math.comb(r - 1, j) * psi[r - j] * phi[j] for j in range(r)
            )
        for k in range(1, m_g + 1):
            a = phi[m_g - k] / math.factorial(m_g - k)
            coeff = c_total * a / math.factorial(k - 1)
            terms.append((coeff, mu_g, k - 1))
    return terms


def conv_mixture(rates: RatesLike) -> SignedExponentialMixture:
    """Signed-mixture form of the sum density.

    Distinct rates give the degree-0 closed form; clustered rates contribute
    Erlang-block terms of degree up to multiplicity - 1 (all rates equal
    recovers the Gamma(N, rate) density exactly).  Note the closed form's
    coefficients are ill-conditioned for cross-cluster gaps below
    SWITCH_THRESHOLD; conv_pdf and conv_cdf switch to the phase-type path in
    that regime rather than evaluating this mixture.
    """
    rv = as_rate_vector(rates)
    if rv.is_distinct:
        coeffs = conv_coefficients(rv)
        terms = [(a * ln, ln, 0) for a, ln in zip(coeffs.coefficients, coeffs.rates)]
    else:
        terms = _confluent_terms(rv.cluster_rates, rv.cluster_sizes)
    return SignedExponentialMixture.from_terms(terms, is_density=True)


# ---------------------------------------------------------------------------
# phase-type form


@dataclass(frozen=True, eq=False)
class PhaseTypeForm:
    """Sum of exponentials in series as an absorbing-chain representation.

    initial puts mass 1 on the first state, the sub-generator is upper
    bidiagonal with diagonal -lambda_n and super-diagonal lambda_n, and the
    exit vector carries lambda_N in the last entry.  Density and cdf come
    from the matrix exponential of the sub-generator, which is accurate
    regardless of how close the rates are.
    """

    initial: np.ndarray
    sub_generator: np.ndarray
    exit_vector: np.ndarray

    def __post_init__(self) -> None:
        a = np.ascontiguousarray(self.initial, dtype=np.float64)
        s = np.ascontiguousarray(self.sub_generator, dtype=np.float64)
        e = np.ascontiguousarray(self.exit_vector, dtype=np.float64)
        n = a.size
        if s.shape != (n, n) or e.shape != (n,):
            raise DomainError("phase-type dimensions are inconsistent")
        if np.any(np.diag(s) >= 0.0):
            raise DomainError("sub-generator diagonal must be strictly negative")
        scale = np.max(np.abs(np.diag(s)))
        row_residual = np.abs(s.sum(axis=1) + e)
        if np.any(row_residual > 1e-12 * scale):
            raise DomainError("rows of [sub-generator | exit] must sum to zero")
        for arr in (a, s, e):
            arr.setflags(write=False)
        object.__setattr__(self, "initial", a)
        object.__setattr__(self, "sub_generator", s)
        object.__setattr__(self, "exit_vector", e)

    @classmethod
    def from_rates(cls, rates: RatesLike) -> "PhaseTypeForm":
        """One state per rate, in series.

        Rates are snapped to their cluster representative first: a nearly
        defective sub-generator (diagonal entries a few ulp apart) costs the
        matrix exponential roughly eps/gap digits, while an exactly repeated
        diagonal is handled accurately.  The snap changes the represented
        distribution by O(cluster_tolerance^2), far below evaluation error.
        """
        rv = as_rate_vector(rates)
        n = rv.n
        snapped = list(rv.rates)
        for group, rep in zip(rv.clusters, rv.cluster_rates):
            for i in group:
                snapped[i] = rep
        alpha = np.zeros(n)
        alpha[0] = 1.0
        sub = np.zeros((n, n))
        for i, lam in enumerate(snapped):
            sub[i, i] = -lam
            if i + 1 < n:
                sub[i, i + 1] = lam
        exit_vec = np.zeros(n)
        exit_vec[-1] = snapped[-1]
        return cls(alpha, sub, exit_vec)


PhaseLike = Union[PhaseTypeForm, RatesLike]


def _as_phase(ph: PhaseLike) -> PhaseTypeForm:
    if isinstance(ph, PhaseTypeForm):
        return ph
    return PhaseTypeForm.from_rates(ph)


def conv_pdf_phase_type(ph: PhaseLike, z: float) -> float:
    """Density via initial . expm(sub_generator z) . exit (scaling and squaring).

    Serves as the gap-independent evaluation path; agrees with the closed
    form to ~1e-12 relative wherever both are well conditioned.
    """
    phase = _as_phase(ph)
    if z < 0.0:
        raise DomainError(f"pdf argument must be non-negative, got {z!r}")
    value = float(phase.initial @ expm(phase.sub_generator * z) @ phase.exit_vector)
    if not math.isfinite(value):
        raise NumericalError(
            f"matrix exponential produced {value!r} at z={z!r} "
            f"(n={phase.initial.size}, max rate {np.max(-np.diag(phase.sub_generator))})"
        )
    return max(value, 0.0)


def _phase_cdf(phase: PhaseTypeForm, z: float) -> float:
    survival = float(phase.initial @ expm(phase.sub_generator * z) @ np.ones(phase.initial.size))
    if not math.isfinite(survival):
        raise NumericalError(f"matrix exponential produced {survival!r} at z={z!r}")
    return _clamp_unit(1.0 - survival, "phase-type cdf")


# ---------------------------------------------------------------------------
# public sum-law operations


def conv_pdf(rates: RatesLike, z: float) -> float:
    """Density of the sum at z >= 0, choosing the stable evaluation path.

    Well-separated clusters use the signed closed form (with exact Erlang
    blocks for repeated rates); when the smallest cross-cluster relative gap
    drops below SWITCH_THRESHOLD the phase-type path takes over.
    """
    rv = as_rate_vector(rates)
    if z < 0.0:
        raise DomainError(f"pdf argument must be non-negative, got {z!r}")
    if rv.min_cross_cluster_gap < SWITCH_THRESHOLD:
        return conv_pdf_phase_type(rv, z)
    return max(mixture_eval(conv_mixture(rv), z), 0.0)


def conv_cdf(rates: RatesLike, z: float) -> float:
    """Distribution function of the sum, same path selection as conv_pdf."""
    rv = as_rate_vector(rates)
    if z < 0.0:
        raise DomainError(f"cdf argument must be non-negative, got {z!r}")
    if rv.min_cross_cluster_gap < SWITCH_THRESHOLD:
        return _phase_cdf(PhaseTypeForm.from_rates(rv), z)
    return mixture_cdf(conv_mixture(rv), z)


def conv_quantile(rates: RatesLike, p: float) -> float:
    """Inverse cdf of the sum; cdf residual at most 1e-10."""
    rv = as_rate_vector(rates)
    if not (0.0 < p < 1.0):
        raise DomainError(f"quantile level must lie strictly in (0,1), got {p!r}")
    if rv.min_cross_cluster_gap >= SWITCH_THRESHOLD:
        return mixture_quantile(conv_mixture(rv), p)
    phase = PhaseTypeForm.from_rates(rv)
    mean, var = conv_moments(rv)
    hi = mean + QUANTILE_BRACKET_SIGMAS * math.sqrt(var)
    for _ in range(200):
        if _phase_cdf(phase, hi) >= p:
            break
        hi *= 1.5
    else:  # pragma: no cover
        raise NumericalError(f"failed to bracket quantile level {p}")
    root = brentq(lambda t: _phase_cdf(phase, t) - p, 0.0, hi, xtol=1e-13, maxiter=200)
    return float(root)


def conv_moments(rates: RatesLike) -> tuple[float, float]:
    """(mean, variance) of the sum: sum 1/lambda_n and sum 1/lambda_n^2."""
    rv = as_rate_vector(rates)
    mean = math.fsum(1.0 / r for r in rv.rates)
    var = math.fsum(1.0 / (r * r) for r in rv.rates)
    return mean, var


def ordering_probability(rate_a: float, rate_b: float) -> float:
    """P(X_b > X_a) for independent X_a ~ Exp(rate_a), X_b ~ Exp(rate_b).

    The faster variable loses: the probability is rate_a / (rate_a + rate_b).
    """
    for r in (rate_a, rate_b):
        if not (math.isfinite(r) and r > 0.0):
            raise DomainError(f"rates must be finite and positive, got {r!r}")
    return rate_a / (rate_a + rate_b)


# ---------------------------------------------------------------------------
# characteristic-function identities


@dataclass(frozen=True)
class CharacteristicFunctionValue:
    """Characteristic-function value at a real frequency; |value| <= 1, value(0) = 1."""

    value: complex
    frequency: float


def char_fn_single(rate: float, t: float) -> CharacteristicFunctionValue:
    """phi(t) = rate / (rate - i t) for one exponential variable."""
    if not (math.isfinite(rate) and rate > 0.0):
        raise DomainError(f"rate must be finite and positive, got {rate!r}")
    return CharacteristicFunctionValue(rate / (rate - 1j * t), t)


def char_fn_product(rates: RatesLike, t: float) -> CharacteristicFunctionValue:
    """Characteristic function of the sum as the product of the factors."""
    rv = as_rate_vector(rates)
    value = complex(1.0)
    for r in rv.rates:
        value *= r / (r - 1j * t)
    return CharacteristicFunctionValue(value, t)


def char_fn_linear_combination(rates: RatesLike, t: float) -> CharacteristicFunctionValue:
    """The same transform written as sum_n A_n phi_n(t) (distinct rates only).

    Real and imaginary parts are each accumulated with compensated summation
    since the A_n alternate in sign.
    """
    rv = as_rate_vector(rates)
    if not rv.is_distinct:
        raise DegenerateRatesError(
            "the linear-combination transform needs pairwise-distinct rates"
        )
    coeffs = conv_coefficients(rv)
    parts = [
        a * (r / (r - 1j * t)) for a, r in zip(coeffs.coefficients, coeffs.rates)
    ]
    value = complex(
        math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts)
    )
    return CharacteristicFunctionValue(value, t)


def partial_fraction_identity_check(rates: RatesLike, probe_rate: float) -> float:
    """Residual of the coefficient identity under an extra probe rate.

    With distinct rates lambda_1..lambda_N and a probe mu distinct from all
    of them, the partial-fraction coefficients satisfy

        sum_n [lambda_n/(lambda_n - mu)] A_n = prod_j lambda_j/(lambda_j - mu).

    Returns |left - right|; the contract is residual <= 1e-8 times the
    coefficient condition estimate.
    """
    rv = as_rate_vector(rates)
    if not (math.isfinite(probe_rate) and probe_rate > 0.0):
        raise DomainError(f"probe rate must be finite and positive, got {probe_rate!r}")
    for r in rv.rates:
        if abs(r - probe_rate) <= rv.cluster_tolerance * max(r, probe_rate):
            raise DomainError(f"probe rate {probe_rate!r} collides with rate {r!r}")
    coeffs = conv_coefficients(rv)
    left = math.fsum(
        a * (r / (r - probe_rate)) for a, r in zip(coeffs.coefficients, coeffs.rates)
    )
    right = 1.0
    for r in rv.rates:
        right *= r / (r - probe_rate)
    return abs(left - right)


# ---------------------------------------------------------------------------
# gamma limit


def gamma_limit_error(lambda_mean: float, delta: float, z_grid) -> float:
    """Max deviation of the rates (lam(1+d), lam(1-d)) sum density from Gamma(2, lam).

    The deviation decays quadratically in delta; at delta = 0 the clustered
    path evaluates the Gamma(2, lambda_mean) density exactly, so the
    deviation is zero.
    """
    if not (math.isfinite(lambda_mean) and lambda_mean > 0.0):
        raise DomainError(f"lambda_mean must be finite and positive, got {lambda_mean!r}")
    if not (0.0 <= delta < 0.5):
        raise DomainError(f"delta must lie in [0, 0.5), got {delta!r}")
    zz = np.asarray(z_grid, dtype=np.float64)
    if np.any(zz < 0.0):
        raise DomainError("grid points must be non-negative")
    reference = lambda_mean**2 * zz * np.exp(-lambda_mean * zz)
    rv = RateVector((lambda_mean * (1.0 + delta), lambda_mean * (1.0 - delta)))
    if rv.min_cross_cluster_gap < SWITCH_THRESHOLD:
        approx = np.array([conv_pdf(rv, float(z)) for z in zz])
    else:
        approx = mixture_eval_grid(conv_mixture(rv), zz)
    return float(np.max(np.abs(approx - reference)))
