#!/usr/bin/env python3
"""
Tests for the special functions: terminating 2F1, Kummer 1F1, complex
log-gamma and Bessel J, checked against mpmath at extended precision.
"""

import cmath
import math

import mpmath
import pytest

from src.errors import DomainError, PolePassed
from src.specialfns import (
    as_complex,
    bessel_j,
    gauss_2f1_terminating,
    hypergeometric_coefficients,
    kummer_1f1,
    kummer_1f1_pair,
    log_gamma_bracket,
    log_gamma_complex,
)

mpmath.mp.dps = 40


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


# Gauss 2F1

def test_2f1_degree_zero_is_one():
    assert gauss_2f1_terminating(0, 0.3 + 2j, -1.5, 7.0) == 1


def test_2f1_degree_one():
    b, c, z = 0.4 - 0.2j, 1.7, 0.9 + 0.1j
    assert close(gauss_2f1_terminating(1, b, c, z), 1 - b * z / c, 1e-15)


def test_2f1_against_mpmath():
    b, c, z = 0.5 + 0.7j, 2.0, 0.3
    expected = complex(mpmath.hyp2f1(-3, b, c, z))
    assert close(gauss_2f1_terminating(3, b, c, z), expected, 1e-14)


def test_2f1_coefficients_sum_to_value():
    b, c = 1.2 + 0.5j, 3.1
    coefficients = hypergeometric_coefficients(5, b, c)
    z = 0.7 - 0.4j
    total = sum(coefficients[k] * z ** k for k in range(6))
    assert close(total, gauss_2f1_terminating(5, b, c, z), 1e-14)


def test_2f1_pole_in_lower_parameter():
    with pytest.raises(PolePassed):
        gauss_2f1_terminating(4, 1.0, -2.0, 0.5)


def test_2f1_rejects_negative_degree():
    with pytest.raises(DomainError):
        gauss_2f1_terminating(-1, 1.0, 2.0, 0.5)


# Kummer 1F1

def test_1f1_at_zero():
    assert kummer_1f1(0.3 + 1j, 2.5, 0) == 1


@pytest.mark.parametrize("z", [0.5, -3.0, 12j, -4 + 7j, 25j])
def test_1f1_equal_parameters_is_exponential(z):
    a = 1.3 - 0.4j
    assert close(kummer_1f1(a, a, z), cmath.exp(z), 1e-11)


def test_1f1_large_imaginary_argument():
    a, c, z = 1 + 0.5j, 2 + 1j, 2j / 0.1
    expected = complex(mpmath.hyp1f1(a, c, z))
    assert close(kummer_1f1(a, c, z), expected, 1e-10)


@pytest.mark.parametrize("y", [0.2, 1.0, 5.0, -8.0, 40.0])
def test_1f1_kernel_parameters_against_mpmath(y):
    s = 0.5 + 0.7j
    z = 2j * y
    expected = complex(mpmath.hyp1f1(s, 2 * s.real + 1, z))
    assert close(kummer_1f1(s, 2 * s.real + 1, z), expected, 1e-10)


def test_1f1_derivative_is_contiguous_function():
    a, c, z = 0.8 + 0.3j, 2.6, 3 - 2j
    value, derivative = kummer_1f1_pair(a, c, z)
    assert close(value, complex(mpmath.hyp1f1(a, c, z)), 1e-11)
    assert close(derivative, a / c * complex(mpmath.hyp1f1(a + 1, c + 1, z)), 1e-11)


def test_1f1_kummer_transformation_consistent():
    a, c, z = 0.6 + 0.2j, 1.9, -6 + 1j
    direct = kummer_1f1(a, c, z)
    transformed = cmath.exp(z) * kummer_1f1(c - a, c, -z)
    assert close(direct, transformed, 1e-11)


def test_1f1_conjugation_symmetry():
    a, c, z = 0.4 + 0.9j, 1.8, 10j
    assert close(kummer_1f1(a, c, z).conjugate(), kummer_1f1(a.conjugate(), c, z.conjugate()), 1e-11)


def test_1f1_pole_in_lower_parameter():
    with pytest.raises(PolePassed):
        kummer_1f1(1.0, -3.0, 0.5)


# log Gamma

def test_log_gamma_one():
    assert abs(log_gamma_complex(1.0)) < 1e-14


def test_log_gamma_half():
    assert abs(log_gamma_complex(0.5) - math.log(math.sqrt(math.pi))) < 1e-14


@pytest.mark.parametrize("z", [3 + 4j, 0.1 - 2j, -2.5 + 0.3j, 30 + 50j, 0.5 - 25j])
def test_log_gamma_against_mpmath(z):
    expected = complex(mpmath.loggamma(z))
    # imaginary part is only defined modulo 2 pi
    assert abs(cmath.exp(log_gamma_complex(z) - expected) - 1) < 1e-12


def test_log_gamma_recursion():
    z = 1.7 + 2.2j
    gap = log_gamma_complex(z + 1) - log_gamma_complex(z) - cmath.log(z)
    assert abs(cmath.exp(gap) - 1) < 1e-13


@pytest.mark.parametrize("z", [0, -1, -4])
def test_log_gamma_poles(z):
    with pytest.raises(PolePassed):
        log_gamma_complex(z)


def test_log_gamma_bracket_matches_beta():
    a, b = 2.5, 1.5
    value = log_gamma_bracket((a, b), (a + b,))
    assert abs(value - math.log(float(mpmath.beta(a, b)))) < 1e-13


# Bessel J

def test_bessel_half_integer_sine():
    assert abs(bessel_j(0.5, math.pi)) < 1e-15


def test_bessel_half_integer_cosine():
    x = math.pi / 3
    assert abs(bessel_j(-0.5, x) - math.sqrt(2 / (math.pi * x)) * math.cos(x)) < 1e-14


def test_bessel_against_series():
    assert abs(bessel_j(1.7, 2.3) - float(mpmath.besselj(1.7, 2.3))) < 1e-14


def test_bessel_rejects_nonpositive_argument():
    with pytest.raises(DomainError):
        bessel_j(1.0, 0.0)


def test_as_complex_rejects_nan():
    with pytest.raises(DomainError):
        as_complex(float("nan"), "s")
