"""
Special functions used by the kernel formulas.

Terminating Gauss 2F1, Kummer 1F1 (with its derivative), complex log-gamma
and Bessel J. Every routine is a pure function of its arguments.
"""

import cmath
import logging
import math
from typing import Iterable, Tuple

import numpy as np
from scipy import special

from .config import (
    BESSEL_MAX_ORDER,
    GAMMA_POLE_TOL,
    KUMMER_SERIES_SPREAD,
    KUMMER_START_RADIUS,
    POLE_TOL,
    SERIES_MAX_TERMS,
    SERIES_REL_TOL,
    TAYLOR_MAX_TERMS,
)
from .errors import DomainError, NoConvergence, PolePassed

logger = logging.getLogger(__name__)

ComplexScalar = complex

# Lanczos approximation, g = 7, nine terms
_LANCZOS_G = 7
_LANCZOS_P0 = 0.99999999999980993
_LANCZOS_P = (
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


def as_complex(value, name: str = "argument") -> complex:
    """Coerce to a finite Python complex."""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return z


def _is_nonpositive_integer(z: complex, tol: float) -> bool:
    nearest = round(z.real)
    return nearest <= 0 and abs(z - nearest) <= tol


def hypergeometric_coefficients(m: int, b, c) -> np.ndarray:
    """Coefficients C_k = (-m)_k (b)_k / ((c)_k k!) for k = 0..m."""
    if m < 0 or int(m) != m:
        raise DomainError(f"degree must be a nonnegative integer, got {m}")
    m = int(m)
    b = as_complex(b, "b")
    c = as_complex(c, "c")
    coefficients = np.empty(m + 1, dtype=complex)
    coefficients[0] = 1.0
    for k in range(m):
        if abs(c + k) <= POLE_TOL:
            raise PolePassed(f"c + {k} vanishes for c = {c}")
        coefficients[k + 1] = coefficients[k] * (k - m) * (b + k) / ((c + k) * (k + 1))
    return coefficients


def gauss_2f1_terminating(m: int, b, c, z) -> complex:
    """2F1[-m, b; c; z] as the exact sum of its m + 1 terms."""
    if m < 0 or int(m) != m:
        raise DomainError(f"degree must be a nonnegative integer, got {m}")
    m = int(m)
    b = as_complex(b, "b")
    c = as_complex(c, "c")
    z = as_complex(z, "z")

    for k in range(m):
        if abs(c + k) <= POLE_TOL:
            raise PolePassed(f"c + {k} vanishes for c = {c}")

    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(m):
        term *= (k - m) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
    return total


def _maclaurin_1f1(a: complex, c: complex, z: complex) -> complex:
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    for n in range(SERIES_MAX_TERMS):
        term *= (a + n) / (c + n) * z / (n + 1)
        total += term
        if term == 0:
            return total
        ratio = abs((a + n + 1) / (c + n + 1) * z / (n + 2))
        if n + 1 > abs(z) and ratio < 1.0:
            tail = abs(term) * ratio / (1.0 - ratio)
            if tail <= SERIES_REL_TOL * abs(total):
                return total
    raise NoConvergence(
        f"1F1 series for a={a}, c={c}, z={z} did not converge in {SERIES_MAX_TERMS} terms"
    )


def _taylor_step(a: complex, c: complex, z0: complex, w: complex, dw: complex,
                 h: complex) -> Tuple[complex, complex]:
    """Advance (w, w') of Kummer's equation z w'' + (c - z) w' - a w = 0 from z0 to z0 + h."""
    b_prev, b_curr = w, dw
    value = w + dw * h
    derivative = dw
    h_power = h
    quiet = 0
    for n in range(TAYLOR_MAX_TERMS):
        b_next = ((n + a) * b_prev - (n + 1) * (n + c - z0) * b_curr) / (z0 * (n + 1) * (n + 2))
        derivative += (n + 2) * b_next * h_power
        h_power *= h
        contribution = b_next * h_power
        value += contribution
        scale = abs(value) + abs(derivative * h)
        if abs(contribution) <= 1e-17 * scale:
            quiet += 1
            if quiet == 2:
                return value, derivative
        else:
            quiet = 0
        b_prev, b_curr = b_curr, b_next
    raise NoConvergence(f"Taylor continuation of 1F1 stalled at z={z0}")


def _continued_1f1_pair(a: complex, c: complex, z: complex) -> Tuple[complex, complex]:
    """Integrate Kummer's equation along the ray from radius KUMMER_START_RADIUS to z."""
    z0 = KUMMER_START_RADIUS * z / abs(z)
    w = _maclaurin_1f1(a, c, z0)
    dw = a / c * _maclaurin_1f1(a + 1, c + 1, z0) if a != 0 else 0j
    steps = max(1, math.ceil(abs(z - z0)))
    h = (z - z0) / steps
    point = z0
    for _ in range(steps):
        w, dw = _taylor_step(a, c, point, w, dw, h)
        point += h
    logger.debug(f"1F1 continued to z={z} in {steps} steps")
    return w, dw


def _right_1f1_pair(a: complex, c: complex, z: complex) -> Tuple[complex, complex]:
    if abs(z) <= KUMMER_START_RADIUS or abs(z) - z.real <= KUMMER_SERIES_SPREAD:
        value = _maclaurin_1f1(a, c, z)
        derivative = a / c * _maclaurin_1f1(a + 1, c + 1, z) if a != 0 else 0j
        return value, derivative
    return _continued_1f1_pair(a, c, z)


def kummer_1f1_pair(a, c, z) -> Tuple[complex, complex]:
    """1F1[a; c; z] together with its z-derivative."""
    a = as_complex(a, "a")
    c = as_complex(c, "c")
    z = as_complex(z, "z")
    if _is_nonpositive_integer(c, GAMMA_POLE_TOL):
        raise PolePassed(f"lower parameter c={c} is a nonpositive integer")
    if z == 0:
        return 1.0 + 0.0j, a / c
    if z.real < 0:
        # Kummer transformation: 1F1[a; c; z] = e^z 1F1[c - a; c; -z]
        v, dv = _right_1f1_pair(c - a, c, -z)
        factor = cmath.exp(z)
        return factor * v, factor * (v - dv)
    return _right_1f1_pair(a, c, z)


def kummer_1f1(a, c, z) -> complex:
    return kummer_1f1_pair(a, c, z)[0]


def _log_sin_pi(z: complex) -> complex:
    w = math.pi * z
    if abs(w.imag) < 20.0:
        return cmath.log(cmath.sin(w))
    if w.imag > 0:
        return -1j * w + cmath.log((1.0 - cmath.exp(2j * w)) * 0.5j)
    return 1j * w + cmath.log((1.0 - cmath.exp(-2j * w)) / 2j)


def log_gamma_complex(z) -> complex:
    """log Gamma(z) by the Lanczos approximation, reflected for Re z < 1/2.

    The imaginary part is determined modulo 2*pi.
    """
    z = as_complex(z, "z")
    if _is_nonpositive_integer(z, GAMMA_POLE_TOL):
        raise PolePassed(f"Gamma has a pole at z={z}")

    if z.real < 0.5:
        return _LOG_PI - _log_sin_pi(z) - log_gamma_complex(1.0 - z)

    z -= 1.0
    series = _LANCZOS_P0
    for i, coefficient in enumerate(_LANCZOS_P):
        series += coefficient / (z + i + 1)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * cmath.log(t) - t + cmath.log(series)


def log_gamma_bracket(numerators: Iterable, denominators: Iterable) -> complex:
    """log of Gamma[a1, a2, ...; b1, b2, ...] = prod Gamma(a_i) / prod Gamma(b_j)."""
    total = 0j
    for a in numerators:
        total += log_gamma_complex(a)
    for b in denominators:
        total -= log_gamma_complex(b)
    return total


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind J_nu(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"Bessel argument must be positive, got {x}")
    if abs(nu) > BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order |nu| must not exceed {BESSEL_MAX_ORDER}, got {nu}")
    return float(special.jv(nu, x))
