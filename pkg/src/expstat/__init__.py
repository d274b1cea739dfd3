"""Exact laws for sums and order statistics of heterogeneous exponentials.

Sums, minima, maxima, two-variable ranges and general order statistics of
independent exponential random variables all have closed forms in one
family, the signed exponential mixture.  This package evaluates those forms
with explicit numerical-stability policies (rate clustering, Erlang blocks,
a phase-type fallback for near-equal rates), provides seeded Monte Carlo
samplers with goodness-of-fit oracles, and ships a small CLI
(``expstat curve | sample | check``).
"""

from .core import (
    DEFAULT_CLUSTER_TOLERANCE,
    ExponentialLaw,
    MixtureTerm,
    RateVector,
    SignedExponentialMixture,
    as_rate_vector,
    exp_cdf,
    exp_pdf,
    exp_sample,
    mixture_cdf,
    mixture_cdf_grid,
    mixture_eval,
    mixture_eval_grid,
    mixture_integral,
    mixture_moment,
    mixture_quantile,
    mixture_sum,
)
from .convolution import (
    SWITCH_THRESHOLD,
    CharacteristicFunctionValue,
    ConvolutionCoefficients,
    PhaseTypeForm,
    char_fn_linear_combination,
    char_fn_product,
    char_fn_single,
    conv_cdf,
    conv_coefficients,
    conv_mixture,
    conv_moments,
    conv_pdf,
    conv_pdf_phase_type,
    conv_quantile,
    gamma_limit_error,
    ordering_probability,
    partial_fraction_identity_check,
)
from .errors import (
    CapacityError,
    ContractError,
    DegenerateRatesError,
    DomainError,
    ExpstatError,
    NumericalError,
)
from .montecarlo import (
    FactorizationReport,
    GoodnessOfFitReport,
    SampleBatch,
    factorization_test,
    ks_test,
    make_stream,
    sample_max,
    sample_min,
    sample_min_range_pairs,
    sample_order,
    sample_sum,
)
from .orderstats import (
    SUBSET_LIMIT,
    OrderStatisticRequest,
    max2_via_convolution,
    max_cdf,
    max_mixture,
    max_pdf,
    min_cdf,
    min_law,
    order_statistic_cdf,
    order_statistic_pdf,
    order_statistic_sample,
    range2_mixture,
)
from .quadrature import sum_pdf_quadrature

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CharacteristicFunctionValue",
    "ContractError",
    "ConvolutionCoefficients",
    "DEFAULT_CLUSTER_TOLERANCE",
    "DegenerateRatesError",
    "DomainError",
    "ExponentialLaw",
    "ExpstatError",
    "FactorizationReport",
    "GoodnessOfFitReport",
    "MixtureTerm",
    "NumericalError",
    "OrderStatisticRequest",
    "PhaseTypeForm",
    "RateVector",
    "SUBSET_LIMIT",
    "SWITCH_THRESHOLD",
    "SampleBatch",
    "SignedExponentialMixture",
    "as_rate_vector",
    "char_fn_linear_combination",
    "char_fn_product",
    "char_fn_single",
    "conv_cdf",
    "conv_coefficients",
    "conv_mixture",
    "conv_moments",
    "conv_pdf",
    "conv_pdf_phase_type",
    "conv_quantile",
    "exp_cdf",
    "exp_pdf",
    "exp_sample",
    "factorization_test",
    "gamma_limit_error",
    "ks_test",
    "make_stream",
    "max2_via_convolution",
    "max_cdf",
    "max_mixture",
    "max_pdf",
    "min_cdf",
    "min_law",
    "mixture_cdf",
    "mixture_cdf_grid",
    "mixture_eval",
    "mixture_eval_grid",
    "mixture_integral",
    "mixture_moment",
    "mixture_quantile",
    "mixture_sum",
    "order_statistic_cdf",
    "order_statistic_pdf",
    "order_statistic_sample",
    "ordering_probability",
    "partial_fraction_identity_check",
    "range2_mixture",
    "sample_max",
    "sample_min",
    "sample_min_range_pairs",
    "sample_order",
    "sample_sum",
    "sum_pdf_quadrature",
]
