#!/usr/bin/env python3
"""
Tests for spectral summaries, ergodic parameters, correlation estimates,
the small-ball second-moment diagnostic and the graph of spectra.
"""

import itertools
import math

import numpy as np
import pytest
from scipy import integrate

from src.ergodic import (
    CorrelationAccumulator,
    OmegaPoint,
    PointConfiguration,
    SpectralSummary,
    box_integral,
    configuration_from_spectrum,
    cotransition_density,
    ergodic_fourier,
    ergodic_functional,
    estimate_correlation,
    gamma2_diagnostic,
    interlaces,
    leading_increments,
    omega_from_summary,
    point_configuration,
    regularity_trace,
    scaled_rho1_s0,
    small_ball_moment_s0,
    small_ball_sum,
    spectral_summary,
    square_near_zero,
)
from src.errors import DegenerateSpectrum, DomainError, NotSorted, TruncationInsufficient
from src.hua_pickrell import CornerChain, HermitianMatrix, SeededRng, sample_corner_chain, sample_spectra
from src.pseudo_jacobi import EnsembleParams


# Summaries and configurations

def test_summary_of_two_eigenvalues():
    summary = spectral_summary([2.0, -1.0], 2)
    assert summary.a_plus[0] == 1.0 and np.all(summary.a_plus[1:] == 0)
    assert summary.a_minus[0] == 0.5 and np.all(summary.a_minus[1:] == 0)
    assert summary.c == 0.5
    assert summary.d == 1.25


def test_summary_of_zero_spectrum():
    summary = spectral_summary([0.0, 0.0, 0.0], 3)
    assert not summary.a_plus.any() and not summary.a_minus.any()
    assert summary.c == 0.0 and summary.d == 0.0
    assert len(point_configuration(summary)) == 0


def test_summary_keeps_every_entry_of_a_large_spectrum():
    # 200 positive eigenvalues, more than the minimum stored length
    summary = spectral_summary(np.linspace(200, 1, 200), 200)
    squares = float(np.sum(summary.a_plus ** 2) + np.sum(summary.a_minus ** 2))
    assert np.count_nonzero(summary.a_plus) == 200
    assert abs(summary.d - squares) <= 1e-12 * summary.d
    assert abs(omega_from_summary(summary).gamma2) <= 1e-12 * summary.d


def test_summary_requires_descending_order():
    with pytest.raises(NotSorted):
        spectral_summary([-1.0, 2.0], 2)


def test_summary_rejects_small_d():
    with pytest.raises(DomainError):
        SpectralSummary(a_plus=[0.5], a_minus=[0.5], c=0.0, d=0.3)


def test_point_configuration_of_summary():
    summary = spectral_summary([2.0, -1.0], 2)
    assert point_configuration(summary).points == (-0.5, 1.0)
    assert point_configuration(omega_from_summary(summary)).points == (-0.5, 1.0)


def test_configuration_from_spectrum_drops_zeros():
    assert configuration_from_spectrum([2.0, 0.0, -1.0], 3).points == pytest.approx((-1 / 3, 2 / 3))


def test_configuration_rejects_origin():
    with pytest.raises(DomainError):
        PointConfiguration((0.0, 1.0))


def test_omega_gamma2():
    omega = OmegaPoint(alpha_plus=[0.6], alpha_minus=[0.3], gamma1=0.1, delta=0.7)
    assert abs(omega.gamma2 - 0.25) < 1e-15
    with pytest.raises(DomainError):
        OmegaPoint(alpha_plus=[1.0], delta=0.5)


# Fourier transform of ergodic measures

def test_fourier_at_zero():
    omega = OmegaPoint(alpha_plus=[0.4, 0.1], alpha_minus=[0.2], gamma1=1.3, delta=0.5)
    assert ergodic_fourier(omega, [0.0, 0.0, 0.0], truncation=4) == 1


def test_fourier_pure_gaussian():
    omega = OmegaPoint(delta=0.49)
    r = [0.5, -1.2, 2.0]
    expected = math.prod(math.exp(-0.49 * rj * rj) for rj in r)
    assert abs(ergodic_fourier(omega, r, truncation=0) - expected) < 1e-15


def test_fourier_single_alpha_modulus():
    a = 0.8
    omega = OmegaPoint(alpha_plus=[a], delta=a * a)
    r = [0.3, -1.5]
    expected = math.prod(1 / math.sqrt(1 + a * a * rj * rj) for rj in r)
    assert abs(abs(ergodic_fourier(omega, r, truncation=1)) - expected) < 1e-14


def test_fourier_truncation_too_short():
    omega = OmegaPoint(alpha_plus=[0.5, 0.4], delta=0.5)
    with pytest.raises(TruncationInsufficient):
        ergodic_fourier(omega, [1.0], truncation=1)


# Correlation estimates

def test_single_point_one_box():
    estimate = estimate_correlation([PointConfiguration((0.5,))], [[(0.4, 0.6)]], k=1)
    assert estimate.means[0] == 1.0
    assert estimate.stderr[0] == 0.0
    assert estimate.sample_count == 1


def test_single_point_has_no_pairs():
    estimate = estimate_correlation([PointConfiguration((0.5,))], [[(0.4, 0.6), (0.4, 0.6)]], k=2)
    assert estimate.means[0] == 0.0


def brute_force_count(points, box):
    k = len(box)
    total = 0
    for labels in itertools.permutations(range(len(points)), k):
        if all(lo <= points[i] <= hi for i, (lo, hi) in zip(labels, box)):
            total += 1
    return total


@pytest.mark.parametrize("k", [2, 3])
def test_ordered_tuple_counts_match_brute_force(k):
    gen = np.random.default_rng(4)
    points = tuple(gen.uniform(0.05, 1.0, size=9))
    boxes = [((0.1, 0.6),) * k, tuple((0.05 + 0.2 * j, 0.7 + 0.1 * j) for j in range(k))]
    estimate = estimate_correlation([PointConfiguration(points)], boxes, k=k)
    for b, box in enumerate(boxes):
        assert estimate.means[b] == brute_force_count(sorted(points), box)


def test_chunked_estimate_matches_sequential():
    gen = np.random.default_rng(5)
    configs = [PointConfiguration(tuple(gen.uniform(0.01, 2.0, size=6))) for _ in range(700)]
    boxes = [[(0.1, 0.5)], [(0.5, 1.5)]]
    sequential = CorrelationAccumulator(boxes, 1)
    for config in configs:
        sequential.add(config)
    chunked = estimate_correlation(configs, boxes, 1)
    expected = sequential.result()
    assert np.allclose(chunked.means, expected.means, rtol=1e-13)
    assert np.allclose(chunked.stderr, expected.stderr, rtol=1e-10)


def test_boxes_must_avoid_origin():
    with pytest.raises(DomainError):
        estimate_correlation([PointConfiguration((0.5,))], [[(-0.1, 0.2)]], k=1)


def test_boxes_must_be_given():
    with pytest.raises(DomainError, match="grid must be nonempty"):
        estimate_correlation([PointConfiguration((0.5,))], [], k=1)


def test_sampled_correlations_match_determinants():
    N = 10
    batch = sample_spectra(N, 0.0, seed=51, count=3000)
    configs = [configuration_from_spectrum(lam, N) for lam in batch.eigenvalues]
    params = EnsembleParams(0.0, N)

    one = [((0.02, 0.1),), ((-0.5, -0.1),), ((0.1, 1.0),)]
    estimate = estimate_correlation(configs, one, k=1)
    for b, box in enumerate(one):
        assert abs(estimate.means[b] - box_integral(box, params)) < 3 * estimate.stderr[b]

    two = [((0.02, 0.1), (0.1, 0.4)), ((-0.4, -0.05), (0.05, 0.4)), ((0.05, 0.3), (0.05, 0.3))]
    estimate = estimate_correlation(configs, two, k=2)
    for b, box in enumerate(two):
        assert abs(estimate.means[b] - box_integral(box, params)) < 3 * estimate.stderr[b]


def test_box_integral_one_point_at_s_zero():
    N = 10
    expected = N * (math.atan(N * 0.4) - math.atan(N * 0.1)) / math.pi
    assert abs(box_integral(((0.1, 0.4),), EnsembleParams(0.0, N)) - expected) < 1e-10


def test_box_integral_pairs_are_symmetric():
    params = EnsembleParams(0.3 + 0.2j, 5)
    first = box_integral(((0.1, 0.3), (0.4, 0.9)), params)
    second = box_integral(((0.4, 0.9), (0.1, 0.3)), params)
    assert abs(first - second) < 1e-7


# Small-ball second moments

def test_closed_form_small_ball_moment():
    expected = 2 / math.pi * (0.1 - math.atan(5) / 50)
    assert abs(small_ball_moment_s0(50, 0.1) - expected) < 1e-16
    numeric, _ = integrate.quad(lambda x: x * x * scaled_rho1_s0(x, 50), -0.1, 0.1, epsabs=0, epsrel=1e-12)
    assert abs(numeric - expected) < 1e-12


def test_small_ball_moment_vanishes_with_epsilon():
    values = [small_ball_moment_s0(80, eps) for eps in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-8


def test_gamma2_diagnostic_against_closed_form():
    batch = sample_spectra(100, 0.0, seed=52, count=800, corners=(50,), workers=4)
    report = gamma2_diagnostic(batch.spectra, [50, 100], [0.2, 0.1, 0.05], s=0.0)
    assert len(report.rows) == 6
    for row in report.rows:
        assert abs(row.estimate - row.closed_form) < 3 * row.stderr
    assert report.decreasing_in_epsilon


def test_gamma2_diagnostic_needs_every_size():
    with pytest.raises(DomainError):
        gamma2_diagnostic({4: np.zeros((3, 4))}, [4, 8], [0.1])


def test_square_near_zero_shape():
    F = square_near_zero(0.1)
    assert F(0.05) == pytest.approx(0.0025)
    assert F(-0.05) == pytest.approx(0.0025)
    assert F(0.3) == 0.0


def test_many_small_points_feed_gamma2():
    # n points of size sigma / sqrt(n) carry total square mass sigma^2
    sigma, F = 0.6, square_near_zero(0.1)
    limit = ergodic_functional(OmegaPoint(delta=sigma * sigma), F)
    for n in (100, 1000, 10000):
        points = np.full(n, sigma / math.sqrt(n))
        assert abs(small_ball_sum(points, [], F) - limit) < 1e-12


def test_functional_of_large_alpha():
    omega = OmegaPoint(alpha_plus=[0.5], delta=0.35)
    assert abs(ergodic_functional(omega, square_near_zero(0.1)) - 0.1) < 1e-15


# Graph of spectra

def test_cotransition_two_by_two():
    assert cotransition_density([0.0], [1.0, -1.0]) == pytest.approx(0.5, rel=1e-15)


def test_cotransition_outside_interlacing():
    assert cotransition_density([1.5], [1.0, -1.0]) == 0.0


def test_cotransition_rejects_ties():
    with pytest.raises(DegenerateSpectrum):
        cotransition_density([0.5, 0.0], [1.0, 0.0, 0.0])


def test_cotransition_is_a_probability_density():
    lam = [2.0, 0.5, -1.0]
    total, _ = integrate.dblquad(
        lambda m2, m1: cotransition_density([m1, m2], lam), 0.5, 2.0, -1.0, 0.5, epsabs=1e-12, epsrel=1e-10
    )
    assert abs(total - 1) < 1e-8


def test_interlacing_predicate():
    assert interlaces([0.5, -0.2], [1.0, 0.0, -1.0])
    assert not interlaces([0.5, 0.2], [1.0, 0.0, -1.0])
    with pytest.raises(NotSorted):
        interlaces([-0.2, 0.5], [1.0, 0.0, -1.0])


def test_regularity_trace_of_diagonal_chain():
    chain = CornerChain(HermitianMatrix(np.diag(np.arange(1.0, 13.0))))
    summaries = regularity_trace(chain, range(1, 13))
    assert all(abs(s.a_plus[0] - 1.0) < 1e-15 for s in summaries)
    assert np.allclose(leading_increments(summaries), 0.0, atol=1e-15)


def test_regularity_trace_of_zero_chain():
    chain = CornerChain(HermitianMatrix(np.zeros((5, 5))))
    for summary in regularity_trace(chain, [1, 3, 5]):
        assert not summary.a_plus.any() and not summary.a_minus.any()
        assert summary.c == 0.0 and summary.d == 0.0


def test_regularity_trace_of_sampled_chain():
    chain = sample_corner_chain(60, 0.0, SeededRng(53))
    summaries = regularity_trace(chain, [15, 30, 60])
    increments = leading_increments(summaries)
    assert increments.shape == (2, 2)
    assert np.all(np.isfinite(increments))
