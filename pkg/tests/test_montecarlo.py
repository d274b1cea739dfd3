"""Seeded sampling, goodness of fit, and the independence check."""

import math

import numpy as np
import pytest

from expstat import (
    ContractError,
    DomainError,
    FactorizationReport,
    GoodnessOfFitReport,
    SampleBatch,
    conv_cdf,
    conv_moments,
    exp_cdf,
    ExponentialLaw,
    factorization_test,
    ks_test,
    make_stream,
    max_cdf,
    min_cdf,
    sample_max,
    sample_min,
    sample_min_range_pairs,
    sample_order,
    sample_sum,
)


# ---------------------------------------------------------------------------
# streams and batches


def test_make_stream_is_reproducible():
    a = make_stream(5, 0).random(10)
    b = make_stream(5, 0).random(10)
    np.testing.assert_array_equal(a, b)


def test_make_stream_ids_are_disjoint():
    a = make_stream(5, 0).random(10)
    b = make_stream(5, 1).random(10)
    assert not np.array_equal(a, b)


def test_disjoint_streams_are_uncorrelated():
    n = 100_000
    a = make_stream(77, 0).random(n)
    b = make_stream(77, 1).random(n)
    rho = float(np.corrcoef(a, b)[0, 1])
    assert abs(rho) < 4.0 / math.sqrt(n)


def test_sample_batch_validates_count():
    with pytest.raises(ContractError):
        SampleBatch(np.zeros(3), seed=0, stream_id=0, count=4)


def test_batch_values_are_read_only():
    batch = sample_sum((1.0, 2.0), 10, seed=1)
    with pytest.raises(ValueError):
        batch.values[0] = 0.0


# ---------------------------------------------------------------------------
# samplers


def test_sample_sum_deterministic_and_positive():
    a = sample_sum((1.0, 2.0), 1000, seed=42, stream_id=3)
    b = sample_sum((1.0, 2.0), 1000, seed=42, stream_id=3)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.values.tobytes() == b.values.tobytes()
    assert np.all(a.values > 0.0)


def test_sample_sum_mean_matches_clt_band():
    rates = (1.0, 2.0)
    n = 1_000_000
    batch = sample_sum(rates, n, seed=101)
    mean, var = conv_moments(rates)
    assert abs(batch.values.mean() - mean) <= 3.0 * math.sqrt(var / n)


def test_sample_min_mean_matches_clt_band():
    n = 1_000_000
    batch = sample_min((1.0, 2.0), n, seed=102)
    assert abs(batch.values.mean() - 1.0 / 3.0) <= 3.0 * (1.0 / 3.0) / 1e3


def test_sample_max_passes_ks_against_product_cdf():
    rates = (0.5, 1.0, 2.0)
    batch = sample_max(rates, 100_000, seed=103)
    report = ks_test(batch, lambda z: max_cdf(rates, float(z)))
    assert report.passed


def test_sample_order_matches_order_sampler_stream():
    batch = sample_order((1.0, 2.0, 3.0), 2, 500, seed=104, stream_id=2)
    again = sample_order((1.0, 2.0, 3.0), 2, 500, seed=104, stream_id=2)
    np.testing.assert_array_equal(batch.values, again.values)
    assert batch.count == 500


def test_sample_rejects_bad_count():
    with pytest.raises(DomainError):
        sample_sum((1.0,), 0, seed=1)


def test_sample_min_range_pairs_shape_and_determinism():
    pairs = sample_min_range_pairs(1.0, 2.0, 20_000, seed=105)
    assert pairs.shape == (20_000, 2)
    assert np.all(pairs >= 0.0)
    again = sample_min_range_pairs(1.0, 2.0, 20_000, seed=105)
    assert pairs.tobytes() == again.tobytes()


# ---------------------------------------------------------------------------
# KS test


def test_ks_accepts_correct_law():
    batch = sample_sum((1.0, 2.0), 100_000, seed=106)
    report = ks_test(batch, lambda z: conv_cdf((1.0, 2.0), float(z)))
    assert report.passed
    assert report.critical_value == pytest.approx(1.628 / math.sqrt(100_000), rel=1e-12)


def test_ks_rejects_wrong_law_with_known_distance():
    # Exp(1) data against an Exp(2) reference: the true KS distance is 1/4
    law = ExponentialLaw(1.0)
    rng = make_stream(107, 0)
    values = -np.log1p(-rng.random(100_000))
    batch = SampleBatch(values, seed=107, stream_id=0, count=100_000)
    report = ks_test(batch, lambda z: exp_cdf(ExponentialLaw(2.0), float(z)))
    assert not report.passed
    assert report.ks_statistic == pytest.approx(0.25, abs=0.01)
    assert law.rate == 1.0


def test_ks_single_observation_statistic():
    batch = SampleBatch(np.array([0.7]), seed=0, stream_id=0, count=1)
    report = ks_test(batch, lambda z: -np.expm1(-z))
    f = exp_cdf(ExponentialLaw(1.0), 0.7)
    assert report.ks_statistic == pytest.approx(max(1.0 - f, f), rel=1e-12)


def test_ks_false_failure_rate_is_calibrated():
    # 200 correct-law batches at alpha = 0.01: expect ~2 failures, allow 5
    failures = 0
    for seed in range(200):
        batch = sample_min((1.0, 3.0), 10_000, seed=seed, stream_id=4)
        report = ks_test(batch, lambda z: min_cdf((1.0, 3.0), float(z)))
        failures += 0 if report.passed else 1
    assert failures <= 5


def test_ks_rejects_non_monotone_reference():
    batch = sample_sum((1.0, 2.0), 1000, seed=108)
    with pytest.raises(ContractError):
        ks_test(batch, lambda z: 0.5 + 0.4 * math.sin(3.0 * z))


def test_ks_rejects_out_of_range_reference():
    batch = sample_sum((1.0, 2.0), 1000, seed=109)
    with pytest.raises(ContractError):
        ks_test(batch, lambda z: 1.5 * conv_cdf((1.0, 2.0), float(z)))


def test_report_flags_must_be_consistent():
    with pytest.raises(ContractError):
        GoodnessOfFitReport(ks_statistic=0.5, n=100, critical_value=0.1, passed=True)
    with pytest.raises(ContractError):
        FactorizationReport(max_deviation=0.5, bound=0.1, n=10_000, grid_size=10, passed=True)


# ---------------------------------------------------------------------------
# factorization test


def test_factorization_accepts_independent_pairs():
    rng = make_stream(110, 0)
    pairs = rng.random((100_000, 2))
    report = factorization_test(pairs)
    assert report.passed


def test_factorization_accepts_min_range_pairs():
    pairs = sample_min_range_pairs(1.0, 2.0, 200_000, seed=111)
    report = factorization_test(pairs)
    assert report.passed


def test_factorization_rejects_comonotone_pairs():
    # (X, X) has joint cdf min(F, G) and the deviation approaches 1/4 - 1/9-ish
    x = -np.log1p(-make_stream(112, 0).random(100_000))
    report = factorization_test(np.column_stack((x, x)))
    assert not report.passed
    assert report.max_deviation > 0.2


def test_factorization_requires_enough_pairs():
    rng = make_stream(113, 0)
    with pytest.raises(DomainError):
        factorization_test(rng.random((9_999, 2)))


def test_factorization_rejects_bad_shape():
    with pytest.raises(DomainError):
        factorization_test(np.zeros((10_000, 3)))
