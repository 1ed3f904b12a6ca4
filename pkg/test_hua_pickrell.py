#!/usr/bin/env python3
"""
Tests for the Hua-Pickrell sampler, corner densities, Hellinger affinities
and the block determinant identity.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.errors import DomainError, NotInHalfplane
from src.hua_pickrell import (
    CornerChain,
    HermitianMatrix,
    SeededRng,
    ZetaChain,
    block_det_identity_check,
    density_msN,
    extend_corner,
    extrapolated_hellinger_rate,
    hellinger_affinity,
    kakutani_divergence_report,
    log_density_msN,
    mu1_density,
    muN_density,
    random_halfplane_matrix,
    sample_corner_chain,
    sample_matrix,
    sample_mu1,
    sample_muN,
    sample_spectra,
    zeta_map,
)


def random_unitary(n, seed):
    gen = np.random.default_rng(seed)
    q, r = np.linalg.qr(gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# Matrices

def test_hermitian_matrix_rejects_asymmetry():
    with pytest.raises(DomainError):
        HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hermitian_matrix_eigenvalues_descending():
    X = HermitianMatrix(np.diag([-1.0, 3.0, 0.5]))
    assert np.allclose(X.eigenvalues(), [3.0, 0.5, -1.0])
    assert X.corner(2).dim == 2


def test_zeta_chain_requires_right_halfplane():
    with pytest.raises(DomainError):
        ZetaChain(0.3, (1 + 1j, -0.2 + 0.5j))


# One-step laws

def test_mu1_is_cauchy_at_s_zero():
    rng = SeededRng(11)
    draws = np.array([sample_mu1(0.0, rng) for _ in range(20000)])
    statistic = stats.kstest(draws, "cauchy").statistic
    assert statistic < 1.63 / math.sqrt(draws.size)


def test_mu1_symmetric_for_real_s():
    rng = SeededRng(12)
    signs = np.sign([sample_mu1(0.7, rng) for _ in range(20000)])
    assert abs(signs.mean()) < 3 / math.sqrt(signs.size)


@pytest.mark.parametrize("s", [0.0, 0.4 + 0.8j, -0.3 - 0.5j])
def test_mu1_density_is_normalized(s):
    total, _ = integrate.quad(lambda t: mu1_density(t, s), -np.inf, np.inf, epsabs=0, epsrel=1e-11, limit=200)
    assert abs(total - 1) < 1e-8


def test_mu1_tilted_mean():
    # E[t] = Im s / Re s for the tilted law with exponent Re s + 1
    s = 1.5 + 0.6j
    rng = SeededRng(13)
    draws = np.array([sample_mu1(s, rng) for _ in range(40000)])
    expected = s.imag / s.real
    assert abs(draws.mean() - expected) < 4 * draws.std() / math.sqrt(draws.size)


def test_muN_radial_mean_at_s_zero():
    rng = SeededRng(21)
    zetas = np.array([sample_muN(2, 0.0, rng) for _ in range(20000)])
    values = 1 / (1 + zetas.real)
    assert np.all(zetas.real > 0)
    assert abs(values.mean() - 2 / 3) < 3 * values.std() / math.sqrt(values.size)


@pytest.mark.parametrize("s,N", [(0.0, 2), (0.3 + 0.5j, 3), (1.0 - 0.7j, 5)])
def test_muN_density_is_normalized(s, N):
    total, _ = integrate.dblquad(
        lambda t, r: muN_density(complex(r, t), s, N),
        0, np.inf, -np.inf, np.inf, epsabs=0, epsrel=1e-9,
    )
    assert abs(total - 1) < 1e-6


def test_muN_density_vanishes_off_halfplane():
    assert muN_density(-0.1 + 2j, 0.5, 3) == 0.0


def test_muN_radial_marginal_histogram():
    s, N = 0.4 + 0.3j, 3
    rng = SeededRng(22)
    radii = np.array([sample_muN(N, s, rng).real for _ in range(20000)])
    # r = B/(1-B), B ~ Beta(N-1, 2 Re s + N)
    transformed = radii / (1 + radii)
    statistic = stats.kstest(transformed, stats.beta(N - 1, 2 * s.real + N).cdf).statistic
    assert statistic < 1.63 / math.sqrt(radii.size)


# Corner recursion

def test_extend_corner_new_zeta_is_the_radial_draw():
    s, Y = 0.6 + 0.2j, HermitianMatrix(np.array([[0.4, 1j], [-1j, -2.0]]))
    X = extend_corner(Y, s, SeededRng(5))
    expected = sample_muN(3, s, SeededRng(5))
    assert np.allclose(X.entries[:2, :2], Y.entries)
    assert abs(zeta_map(X).zetas[-1] - expected) < 1e-12 * max(1.0, abs(expected))


def test_zeta_map_of_sampled_matrix():
    X = sample_matrix(6, 0.5, SeededRng(6))
    chain = zeta_map(X)
    assert len(chain) == 6
    assert chain.zeta1 == X.entries[0, 0].real


def test_zeta_coordinates_pairwise_decorrelated():
    rng = SeededRng(23)
    chains = [zeta_map(sample_matrix(4, 0.3 + 0.2j, rng.spawn(i))) for i in range(3000)]
    # coordinate index -> observed parts of that coordinate
    parts = {1: [np.array([c.zeta1 for c in chains])]}
    for n in range(2, 5):
        values = np.array([c.zetas[n - 2] for c in chains])
        parts[n] = [values.real, values.imag]
    bound = 4 / math.sqrt(len(chains))
    for a in parts:
        for b in parts:
            if a >= b:
                continue
            for u in parts[a]:
                for v in parts[b]:
                    assert abs(stats.spearmanr(u, v).statistic) < bound


def test_zeta_marginals_of_sampled_matrices():
    s, N, count = 0.4 + 0.3j, 5, 3000
    rng = SeededRng(24)
    chains = [zeta_map(sample_matrix(N, s, rng.spawn(i))) for i in range(count)]
    reference = SeededRng(25)
    first = [sample_mu1(s, reference) for _ in range(count)]
    assert stats.ks_2samp([c.zeta1 for c in chains], first).pvalue > 0.001
    for n in range(2, N + 1):
        radii = np.array([c.zetas[n - 2].real for c in chains])
        statistic = stats.kstest(radii / (1 + radii), stats.beta(n - 1, 2 * s.real + n).cdf).statistic
        assert statistic < 1.95 / math.sqrt(count)


def test_extend_corner_is_unitarily_covariant():
    # the law of extend_corner(V Y V*) is that of (V + 1) extend_corner(Y) (V + 1)*
    s, count = 0.5 - 0.3j, 3000
    Y = HermitianMatrix(np.array([[1.0, 0.5 - 0.2j, 0.0], [0.5 + 0.2j, -0.7, 0.3j], [0.0, -0.3j, 2.0]]))
    V = random_unitary(3, 26)
    rotated = Y.conjugated_by(V)
    rng_a, rng_b = SeededRng(27), SeededRng(28)
    plain = [extend_corner(Y, s, rng_a.spawn(i)) for i in range(count)]
    turned = [extend_corner(rotated, s, rng_b.spawn(i)) for i in range(count)]
    statistics = [
        lambda X: X.entries[3, 3].real,
        lambda X: float(np.linalg.norm(X.entries[:3, 3])),
        lambda X: X.eigenvalues()[0],
        lambda X: X.eigenvalues()[-1],
    ]
    for statistic in statistics:
        result = stats.ks_2samp([statistic(X) for X in plain], [statistic(X) for X in turned])
        assert result.pvalue > 0.01 / len(statistics)


def test_sample_matrix_dimension_bounds():
    with pytest.raises(DomainError):
        sample_matrix(0, 0.0, SeededRng(1))
    with pytest.raises(DomainError):
        sample_matrix(201, 0.0, SeededRng(1))


def test_interlacing_of_sampled_chains():
    rng = SeededRng(7)
    for i in range(10_000):
        chain = sample_corner_chain(8, 0.3 - 0.4j, rng.spawn(i))
        assert chain.interlacing_holds()


def test_chain_of_diagonal_matrix():
    chain = CornerChain(HermitianMatrix(np.diag([1.0, 2.0, 3.0])))
    assert np.allclose(chain.spectrum(3), [3.0, 2.0, 1.0])
    assert np.allclose(chain.spectrum(1), [1.0])
    assert chain.interlacing_holds()


def test_corner_consistency():
    big = sample_spectra(10, 0.0, seed=31, count=2000, corners=(5,))
    small = sample_spectra(5, 0.0, seed=32, count=2000)
    for column in (0, 2, 4):
        result = stats.ks_2samp(big.spectra[5][:, column], small.eigenvalues[:, column])
        assert result.pvalue > 0.01


def test_eigenvalue_counts_match_cauchy_density():
    # at s = 0 each eigenvalue is marginally standard Cauchy
    N = 10
    batch = sample_spectra(N, 0.0, seed=33, count=3000)
    for lo, hi in [(-0.5, 0.5), (1.0, 3.0), (-10.0, -2.0)]:
        counts = np.sum((batch.eigenvalues > lo) & (batch.eigenvalues < hi), axis=1)
        expected = N * (math.atan(hi) - math.atan(lo)) / math.pi
        assert abs(counts.mean() - expected) < 3 * counts.std() / math.sqrt(counts.size)


def test_eigenvalue_histogram_chi_square_at_s_zero():
    # N rho_1 / N is the standard Cauchy density per eigenvalue
    N = 10
    batch = sample_spectra(N, 0.0, seed=35, count=10_000, workers=4)
    values = batch.eigenvalues.reshape(-1)
    edges = np.array([-np.inf, -5.0, -2.0, -1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0, 2.0, 5.0, np.inf])
    observed, _ = np.histogram(values, bins=edges)
    expected = values.size * np.diff(np.arctan(edges)) / math.pi
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    assert statistic < stats.chi2.ppf(0.99, edges.size - 2)


def test_spectrum_sign_symmetry_for_real_s():
    batch = sample_spectra(6, 0.5, seed=34, count=3000)
    positive = np.sum(batch.eigenvalues > 0, axis=1) - 3
    assert abs(positive.mean()) < 3 * positive.std() / math.sqrt(positive.size)


def test_sampling_is_reproducible_and_worker_independent():
    first = sample_spectra(4, 0.2 + 0.1j, seed=99, count=600, corners=(2,))
    again = sample_spectra(4, 0.2 + 0.1j, seed=99, count=600, corners=(2,))
    pooled = sample_spectra(4, 0.2 + 0.1j, seed=99, count=600, corners=(2,), workers=2)
    for k in (2, 4):
        assert np.array_equal(first.spectra[k], again.spectra[k])
        assert np.array_equal(first.spectra[k], pooled.spectra[k])


def test_sample_count_must_be_positive():
    with pytest.raises(DomainError):
        sample_spectra(3, 0.0, seed=1, count=0)


# Densities

def test_corner_density_at_origin():
    assert abs(density_msN(HermitianMatrix([[0.0]]), 0.0) - 1 / math.pi) < 1e-15


@pytest.mark.parametrize("t", [-2.0, 0.3, 5.0])
def test_corner_density_one_by_one_is_mu1(t):
    s = 0.7 - 1.1j
    assert abs(density_msN(HermitianMatrix([[t]]), s) / mu1_density(t, s) - 1) < 1e-12


@pytest.mark.parametrize("s", [0.0, 0.3 + 0.4j])
def test_corner_density_is_normalized_on_two_by_two(s):
    # Lebesgue measure on H(2) in eigenvalue coordinates: (pi / 2) (l1 - l2)^2 dl1 dl2
    total, _ = integrate.dblquad(
        lambda l2, l1: math.pi / 2 * (l1 - l2) ** 2 * density_msN(HermitianMatrix(np.diag([l1, l2])), s),
        -np.inf, np.inf, -np.inf, np.inf, epsabs=0, epsrel=1e-9,
    )
    assert abs(total - 1) < 1e-5


def test_corner_density_unitary_invariance():
    X = sample_matrix(4, 0.3 + 0.2j, SeededRng(8))
    U = random_unitary(4, 9)
    gap = log_density_msN(X.conjugated_by(U), 0.3 + 0.2j) - log_density_msN(X, 0.3 + 0.2j)
    assert abs(gap) < 1e-10


# Hellinger affinities

def test_affinity_of_equal_parameters():
    assert hellinger_affinity(0.4 + 0.3j, 0.4 + 0.3j, 7) == 1.0


def test_affinity_below_one():
    assert 0 < hellinger_affinity(0.0, 1.0, 10) < 1


@pytest.mark.parametrize("s1,s2", [(0.0, 1.0), (0.3 + 0.5j, 1.1 - 0.2j)])
def test_affinity_matches_zeta_integral(s1, s2):
    N = 3
    direct, _ = integrate.dblquad(
        lambda t, r: math.sqrt(muN_density(complex(r, t), s1, N) * muN_density(complex(r, t), s2, N)),
        0, np.inf, -np.inf, np.inf, epsabs=0, epsrel=1e-10,
    )
    assert abs(hellinger_affinity(s1, s2, N) - direct) < 1e-6


@pytest.mark.parametrize("s1,s2", [(0.0, 1.0), (0.5, 0.5 + 1j), (0.2 + 0.3j, 1.1 - 0.4j)])
def test_extrapolated_rate(s1, s2):
    expected = abs(s1 - s2) ** 2 / 4
    assert abs(extrapolated_hellinger_rate(s1, s2) / expected - 1) < 0.02


def test_kakutani_slope():
    report = kakutani_divergence_report(0.0, 1.0, 10_000)
    assert abs(report.slope / -0.25 - 1) < 0.05
    assert report.expected_slope == -0.25
    assert np.all(np.diff(report.log_products) < 0)


def test_kakutani_equal_parameters():
    report = kakutani_divergence_report(0.5, 0.5, 100)
    assert np.all(report.products == 1.0)
    assert report.slope == 0.0


# Block determinant identity

def test_block_identity_classical_case():
    A = random_halfplane_matrix(5, SeededRng(40))
    assert block_det_identity_check(A, 1.0, 2) <= 1e-13


def test_block_identity_for_identity_matrix():
    assert block_det_identity_check(np.eye(4), 0.3 - 0.8j, 1) == 0.0


def test_block_identity_random_instances():
    rng = SeededRng(41)
    gen = np.random.default_rng(42)
    for i in range(100):
        n = int(gen.integers(2, 7))
        split = int(gen.integers(1, n))
        radius, angle = math.sqrt(gen.random()), 2 * math.pi * gen.random()
        z = 1 + radius * complex(math.cos(angle), math.sin(angle))
        A = random_halfplane_matrix(n, rng.spawn(i))
        assert block_det_identity_check(A, z, split) <= 1e-10


def test_block_identity_rejects_left_halfplane():
    with pytest.raises(NotInHalfplane):
        block_det_identity_check(-np.eye(3), 0.5, 1)
