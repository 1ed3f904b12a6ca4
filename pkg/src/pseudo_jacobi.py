"""
Finite-N pseudo-Jacobi ensemble.

Weight phi(x) = (1+x^2)^(-Re s - N) exp(2 Im s arctan x), its monic
orthogonal polynomials, their norms, the Christoffel-Darboux correlation
kernel and the determinantal correlation functions built from it.

Polynomials are generated by their three-term recurrence with a running
log-scale so that N up to a few hundred stays inside double range. The
closed hypergeometric formulas are kept as an independent evaluation route.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .config import (
    DIAGONAL_SWITCH,
    IMAG_LEAK_NORM,
    IMAG_LEAK_POLY,
    MAX_CORRELATION_POINTS,
    MAX_N_ENSEMBLE,
    NEGATIVE_DET_TOL,
    RESCALE_THRESHOLD,
)
from .errors import DomainError, ImaginaryLeak, NegativeDeterminant, NotDefined, Underflow
from .specialfns import as_complex, hypergeometric_coefficients, log_gamma_bracket

logger = logging.getLogger(__name__)

_LOG_RESCALE = math.log(RESCALE_THRESHOLD)
_LOG_TINY = math.log(np.finfo(float).tiny)
_LOG_HUGE = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class EnsembleParams:
    """Complex parameter s (Re s > -1/2) and particle number N."""

    s: complex
    N: int

    def __post_init__(self):
        s = as_complex(self.s, "s")
        if not s.real > -0.5:
            raise DomainError(f"Re s must exceed -1/2, got {s.real}", key="s")
        if int(self.N) != self.N or not 1 <= self.N <= MAX_N_ENSEMBLE:
            raise DomainError(f"N must be between 1 and {MAX_N_ENSEMBLE}, got {self.N}", key="N")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "N", int(self.N))

    @property
    def re(self) -> float:
        return self.s.real

    @property
    def im(self) -> float:
        return self.s.imag

    def conjugate(self) -> "EnsembleParams":
        return EnsembleParams(self.s.conjugate(), self.N)

    def with_size(self, N: int) -> "EnsembleParams":
        return EnsembleParams(self.s, N)


@dataclass(frozen=True)
class PolyEval:
    value: float
    derivative: float
    second: float


@dataclass(frozen=True)
class ComplexPolyEval:
    """Evaluation of the complex-coefficient polynomial p~_N."""

    value: complex
    derivative: complex
    second: complex


# Weight


def log_weight_phi(x, params: EnsembleParams):
    x = np.asarray(x, dtype=float)
    value = -(params.re + params.N) * np.log1p(np.square(x)) + 2.0 * params.im * np.arctan(x)
    return float(value) if value.ndim == 0 else value


def weight_phi(x: float, params: EnsembleParams) -> float:
    log_value = log_weight_phi(x, params)
    if log_value < _LOG_TINY:
        raise Underflow(f"phi({x}) = exp({log_value:.1f}) is below double range; use log_weight_phi")
    return math.exp(log_value)


# Recurrence


def recurrence_coefficients(m: int, params: EnsembleParams) -> Tuple[float, float]:
    """(b_m, a_m) in p_{m+1} = (x - b_m) p_m - a_m p_{m-1}."""
    r, b, N = params.re, params.im, params.N
    n = N - m
    shift = b * (r + N) / ((r + n) * (r + n - 1)) if b != 0 else 0.0
    if m == 0:
        return shift, 0.0
    coupling = (
        4.0 * m * (2 * r + 2 * N - m) * ((r + n) ** 2 + b ** 2)
        / ((2 * r + 2 * n) ** 2 * (2 * r + 2 * n - 1) * (2 * r + 2 * n + 1))
    )
    return shift, coupling


def tilde_shift(params: EnsembleParams) -> complex:
    """Complex shift replacing b_{N-1} in the last recurrence step for p~_N."""
    r, b, N = params.re, params.im, params.N
    return b * (2 * r + 1 + N) / ((r + 1) * (2 * r + 1)) + 1j * N / (2 * r + 1)


@dataclass
class _Recurrence:
    x: np.ndarray
    rows: np.ndarray  # p_m, p_{m-1}, p_m', p_{m-1}', p_m'', p_{m-1}''
    log_scale: np.ndarray


def _run_recurrence(x, params: EnsembleParams, m: int) -> _Recurrence:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rows = np.zeros((6, x.size))
    rows[0] = 1.0
    log_scale = np.zeros(x.size)
    for k in range(m):
        shift, coupling = recurrence_coefficients(k, params)
        p, p_prev, d, d_prev, dd, dd_prev = rows
        step = x - shift
        rows = np.array([
            step * p - coupling * p_prev, p,
            p + step * d - coupling * d_prev, d,
            2.0 * d + step * dd - coupling * dd_prev, dd,
        ])
        big = np.max(np.abs(rows), axis=0) > RESCALE_THRESHOLD
        if np.any(big):
            rows[:, big] /= RESCALE_THRESHOLD
            log_scale[big] += _LOG_RESCALE
    return _Recurrence(x, rows, log_scale)


def _tilde_rows(state: _Recurrence, params: EnsembleParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    p, p_prev, d, d_prev, dd, dd_prev = state.rows
    _, coupling = recurrence_coefficients(params.N - 1, params)
    step = state.x - tilde_shift(params)
    value = step * p - coupling * p_prev
    derivative = p + step * d - coupling * d_prev
    second = 2.0 * d + step * dd - coupling * dd_prev
    return value, derivative, second


def _check_exists(m: int, params: EnsembleParams) -> None:
    if m < 0 or int(m) != m:
        raise DomainError(f"degree must be a nonnegative integer, got {m}")
    if m < params.re + params.N - 0.5:
        return
    if m == params.N and (params.re != 0 or params.im == 0):
        return
    if m == params.N:
        raise NotDefined(f"p_{m} is singular on Re s = 0 for s={params.s}; use poly_p_tilde")
    raise NotDefined(f"p_{m} does not exist: need m < Re s + N - 1/2 = {params.re + params.N - 0.5}")


def _unscale(values: Iterable[float], log_scale: float) -> Tuple[float, ...]:
    factor = math.exp(log_scale) if log_scale < _LOG_HUGE else math.inf
    result = tuple(float(v) * factor for v in values)
    if not all(math.isfinite(v) for v in result):
        raise DomainError(f"polynomial value exceeds double range (log scale {log_scale:.1f})")
    return result


def _closed_form_s0(m: int, x: float, N: int) -> PolyEval:
    """Polynomials p_N and p_{N-1} at s = 0 from powers of (x + i) and (x - i)."""
    plus, minus = complex(x, 1.0), complex(x, -1.0)
    sign, denom = (1.0, 2.0) if m == N else (-1.0, 2j * N)

    def combo(power: int) -> complex:
        if power < 0:
            return 0j
        return plus ** power + sign * minus ** power

    value = combo(N) / denom
    derivative = N * combo(N - 1) / denom
    second = N * (N - 1) * combo(N - 2) / denom
    return PolyEval(value.real, derivative.real, second.real)


def poly_p(m: int, x: float, params: EnsembleParams) -> PolyEval:
    """Monic orthogonal polynomial p_m and its first two derivatives."""
    _check_exists(m, params)
    if params.s == 0 and m in (params.N - 1, params.N):
        return _closed_form_s0(m, x, params.N)
    state = _run_recurrence(x, params, m)
    value, derivative, second = _unscale(state.rows[[0, 2, 4], 0], state.log_scale[0])
    return PolyEval(value, derivative, second)


def poly_p_tilde(x: float, params: EnsembleParams) -> ComplexPolyEval:
    """p~_N = p_N - 2iNs/(2Re s (2Re s + 1)) p_{N-1}, defined on all of Re s > -1/2."""
    state = _run_recurrence(x, params, params.N - 1)
    value, derivative, second = _tilde_rows(state, params)
    factor = math.exp(state.log_scale[0])
    return ComplexPolyEval(complex(value[0] * factor), complex(derivative[0] * factor),
                           complex(second[0] * factor))


def _explicit_sum(coefficients: np.ndarray, degree: int, x: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Terms of sum_k C_k (-2i)^k (x - i)^(degree - k) and of its first two derivatives."""
    k = np.arange(coefficients.size)
    powers = degree - k
    base = complex(x, -1.0)
    weights = coefficients * (-2j) ** k
    terms = weights * base ** powers
    d_terms = weights * powers * base ** np.maximum(powers - 1, 0)
    dd_terms = weights * powers * (powers - 1) * base ** np.maximum(powers - 2, 0)
    return terms, d_terms, dd_terms


def poly_p_explicit(m: int, x: float, params: EnsembleParams) -> PolyEval:
    """p_m from (x-i)^m 2F1[-m, s+N-m; 2Re s+2N-2m | 2/(1+ix)], term-differentiated."""
    _check_exists(m, params)
    if params.s == 0 and m == params.N:
        return _closed_form_s0(m, x, params.N)
    N, r = params.N, params.re
    coefficients = hypergeometric_coefficients(m, params.s + N - m, 2 * r + 2 * N - 2 * m)
    parts = _explicit_sum(coefficients, m, x)
    values = []
    for terms in parts:
        total = terms.sum()
        scale = np.abs(terms).sum()
        if abs(total.imag) > IMAG_LEAK_POLY * max(scale, 1e-300):
            raise ImaginaryLeak(
                f"p_{m}({x}) kept imaginary part {total.imag:.3e} against term scale {scale:.3e}"
            )
        values.append(float(total.real))
    return PolyEval(*values)


def poly_p_tilde_explicit(x: float, params: EnsembleParams) -> ComplexPolyEval:
    """p~_N from (x-i)^N 2F1[-N, s; 2Re s+1 | 2/(1+ix)]."""
    coefficients = hypergeometric_coefficients(params.N, params.s, 2 * params.re + 1)
    terms, d_terms, dd_terms = _explicit_sum(coefficients, params.N, x)
    return ComplexPolyEval(complex(terms.sum()), complex(d_terms.sum()), complex(dd_terms.sum()))


# Norms


def _real_exponent(log_value: complex, what: str) -> float:
    residue = math.remainder(log_value.imag, 2.0 * math.pi)
    if abs(residue) > IMAG_LEAK_NORM:
        raise ImaginaryLeak(f"{what} has relative imaginary residue {residue:.3e}")
    return log_value.real


def log_norm_sq(m: int, params: EnsembleParams) -> float:
    if m < 0 or int(m) != m:
        raise DomainError(f"degree must be a nonnegative integer, got {m}")
    if not m < params.re + params.N - 0.5:
        raise NotDefined(f"||p_{m}||^2 is infinite: need m < Re s + N - 1/2")
    r, s, N = params.re, params.s, params.N
    n = N - m
    log_value = (
        math.log(math.pi) - 2 * r * math.log(2.0) - 2 * (n - 1) * math.log(2.0)
        + log_gamma_bracket(
            (2 * r + 2 * n - 1, 2 * r + 2 * n, m + 1),
            (s + n, s.conjugate() + n, 2 * r + 2 * N - m),
        )
    )
    return _real_exponent(log_value, f"||p_{m}||^2")


def norm_sq(m: int, params: EnsembleParams) -> float:
    return math.exp(log_norm_sq(m, params))


def log_inverse_norm_edge(params: EnsembleParams) -> float:
    """log of the kernel prefactor (2^(2Re s)/pi) Gamma[2Re s+N+1, s+1, s*+1; N, 2Re s+1, 2Re s+2]."""
    r, s, N = params.re, params.s, params.N
    log_value = 2 * r * math.log(2.0) - math.log(math.pi) + log_gamma_bracket(
        (2 * r + N + 1, s + 1, s.conjugate() + 1),
        (N, 2 * r + 1, 2 * r + 2),
    )
    return _real_exponent(log_value, "kernel prefactor")


# Kernel


@dataclass
class _EdgeFunctions:
    tilde: np.ndarray
    d_tilde: np.ndarray
    prev: np.ndarray
    d_prev: np.ndarray
    log_factor: np.ndarray  # log scale plus half log weight


def _edge_functions(x, params: EnsembleParams) -> _EdgeFunctions:
    state = _run_recurrence(x, params, params.N - 1)
    tilde, d_tilde, _ = _tilde_rows(state, params)
    log_factor = state.log_scale + 0.5 * log_weight_phi(state.x, params)
    return _EdgeFunctions(tilde, d_tilde, state.rows[0], state.rows[2], np.atleast_1d(log_factor))


def _confluent_values(x: np.ndarray, params: EnsembleParams, log_const: float) -> np.ndarray:
    edge = _edge_functions(x, params)
    first = edge.d_tilde * edge.prev
    second = edge.d_prev * edge.tilde
    wronskian = first - second
    scale = np.abs(first) + np.abs(second)
    if np.any(np.abs(wronskian.imag) > IMAG_LEAK_POLY * np.maximum(scale, 1e-300)):
        raise ImaginaryLeak("confluent kernel kept an imaginary part")
    return wronskian.real * np.exp(2.0 * edge.log_factor + log_const)


def cd_kernel_matrix(points: Sequence[float], params: EnsembleParams) -> np.ndarray:
    """Symmetric matrix [K(x_i, x_j)] of the correlation kernel."""
    xs = np.asarray(points, dtype=float).ravel()
    log_const = log_inverse_norm_edge(params)
    edge = _edge_functions(xs, params)

    diff = xs[:, None] - xs[None, :]
    magnitude = np.maximum(np.abs(xs)[:, None], np.abs(xs)[None, :])
    near = np.abs(diff) < DIAGONAL_SWITCH * (1.0 + magnitude)

    first = edge.tilde[:, None] * edge.prev[None, :]
    second = edge.prev[:, None] * edge.tilde[None, :]
    numer = first - second
    scale = np.abs(first) + np.abs(second)
    leak = (~near) & (np.abs(numer.imag) > IMAG_LEAK_POLY * np.maximum(scale, 1e-300))
    if np.any(leak):
        raise ImaginaryLeak(f"kernel numerator kept an imaginary part at {np.count_nonzero(leak)} pairs")

    with np.errstate(divide="ignore", invalid="ignore"):
        off = numer.real / diff * np.exp(edge.log_factor[:, None] + edge.log_factor[None, :] + log_const)
    kernel = np.where(near, 0.0, off)

    rows, cols = np.nonzero(np.triu(near))
    if rows.size:
        kernel[rows, cols] = _confluent_values(0.5 * (xs[rows] + xs[cols]), params, log_const)
    return np.triu(kernel) + np.triu(kernel, 1).T


def cd_kernel(x1: float, x2: float, params: EnsembleParams) -> float:
    """K^(s,N)(x1, x2) including sqrt(phi(x1) phi(x2)) and the Gamma-bracket prefactor."""
    lo, hi = sorted((float(x1), float(x2)))
    return float(cd_kernel_matrix([lo, hi], params)[0, 1])


def cd_kernel_direct_sum(x1: float, x2: float, params: EnsembleParams) -> float:
    """Christoffel-Darboux kernel as the sum over m < N of p_m p_m / ||p_m||^2.

    Each term is formed in log scale with the weight folded in, so the sum
    stays finite wherever the kernel is.
    """
    x = np.array([x1, x2], dtype=float)
    half_log_phi = 0.5 * log_weight_phi(x, params)
    p, p_prev = np.ones(2), np.zeros(2)
    log_scale = np.zeros(2)
    total = 0.0
    for m in range(params.N):
        if m > 0:
            shift, coupling = recurrence_coefficients(m - 1, params)
            p, p_prev = (x - shift) * p - coupling * p_prev, p
            big = np.maximum(np.abs(p), np.abs(p_prev)) > RESCALE_THRESHOLD
            if np.any(big):
                p[big] /= RESCALE_THRESHOLD
                p_prev[big] /= RESCALE_THRESHOLD
                log_scale[big] += _LOG_RESCALE
        sign = np.sign(p[0]) * np.sign(p[1])
        if sign == 0:
            continue
        log_term = float(np.sum(np.log(np.abs(p)) + log_scale + half_log_phi)) - log_norm_sq(m, params)
        total += sign * math.exp(log_term)
    return float(total)



def cd_kernel_pn_form(x1: float, x2: float, params: EnsembleParams) -> float:
    """Kernel from p_N and p_{N-1}; needs Re s away from zero."""
    if abs(params.re) <= 0.01:
        raise NotDefined(f"p_N form needs |Re s| > 0.01, got {params.re}")
    lo, hi = sorted((float(x1), float(x2)))
    log_const = log_inverse_norm_edge(params)
    state = _run_recurrence([lo, hi], params, params.N)
    p, p_prev, d, d_prev = state.rows[:4]
    log_factor = state.log_scale + 0.5 * log_weight_phi(state.x, params)
    if abs(hi - lo) < DIAGONAL_SWITCH * (1.0 + max(abs(lo), abs(hi))):
        wronskian = d[0] * p_prev[0] - d_prev[0] * p[0]
        return float(wronskian * math.exp(2 * log_factor[0] + log_const))
    numer = p[0] * p_prev[1] - p_prev[0] * p[1]
    return float(numer / (lo - hi) * math.exp(log_factor[0] + log_factor[1] + log_const))


# Correlation functions


def correlation_fn(points: Sequence[float], params: EnsembleParams) -> float:
    """n-point correlation det[K(x_i, x_j)]."""
    n = len(points)
    if not 1 <= n <= MAX_CORRELATION_POINTS:
        raise DomainError(f"correlation needs 1 to {MAX_CORRELATION_POINTS} points, got {n}")
    det = float(np.linalg.det(cd_kernel_matrix(points, params)))
    if det < -NEGATIVE_DET_TOL:
        raise NegativeDeterminant(f"correlation determinant {det:.3e} at points {list(points)}")
    if det < 0:
        logger.debug(f"Clamped correlation determinant {det:.3e} to zero")
        return 0.0
    return det


def scaled_correlation(points: Sequence[float], params: EnsembleParams) -> float:
    """rho_n(x) = N^n det[K(N x_i, N x_j)] on the punctured line."""
    xs = np.asarray(points, dtype=float)
    if np.any(xs == 0):
        raise DomainError("scaled correlation points must be nonzero")
    return params.N ** len(xs) * correlation_fn(params.N * xs, params)


def scaled_density(x, params: EnsembleParams):
    """Scaled one-point density N K(Nx, Nx), vectorized over x."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    values = params.N * _confluent_values(params.N * xs, params, log_inverse_norm_edge(params))
    return float(values[0]) if np.ndim(x) == 0 else values


Interval = Tuple[float, float]


def trace_integral(region: Union[Interval, Sequence[Interval]], params: EnsembleParams) -> float:
    """Integral of the scaled density over a union of intervals."""
    intervals = [region] if np.ndim(region) == 1 else list(region)
    total = 0.0
    for lo, hi in intervals:
        if lo <= 0 <= hi:
            raise DomainError(f"interval ({lo}, {hi}) must avoid zero")
        value, _ = integrate.quad(lambda t: scaled_density(t, params), lo, hi, limit=200)
        total += value
    return total


# Oracles and checks


def ode_residual(m: int, x: float, params: EnsembleParams, relative: bool = False) -> float:
    """Residual of -(1+x^2) p'' + 2(-Im s + (Re s+N-1) x) p' + m(m+1-2Re s-2N) p."""
    poly = poly_p_explicit(m, x, params)
    r, b, N = params.re, params.im, params.N
    terms = (
        -(1.0 + x * x) * poly.second,
        2.0 * (-b + (r + N - 1) * x) * poly.derivative,
        m * (m + 1 - 2 * r - 2 * N) * poly.value,
    )
    residual = sum(terms)
    if relative:
        scale = sum(abs(t) for t in terms)
        return abs(residual) / scale if scale > 0 else 0.0
    return residual


def weighted_inner_product(m: int, n: int, params: EnsembleParams) -> float:
    """Quadrature value of the integral of p_m p_n phi over the real line.

    Computed on x = tan(theta), where the weight becomes
    cos(theta)^(2Re s + 2N - 2) exp(2 Im s theta) and the algebraic end
    behaviour is handed to QUADPACK's 'alg' weight.
    """
    _check_exists(m, params)
    _check_exists(n, params)
    r, b, N = params.re, params.im, params.N
    exponent = 2 * r + 2 * N - 2 - m - n
    if exponent <= -1:
        raise NotDefined(f"p_{m} p_{n} is not integrable against phi")
    half_pi = 0.5 * math.pi

    def smooth_part(theta: float) -> float:
        x = math.tan(theta)
        c = math.cos(theta)
        left = poly_p(m, x, params).value * c ** m
        right = poly_p(n, x, params).value * c ** n
        ratio = c / ((half_pi + theta) * (half_pi - theta))
        return left * right * ratio ** exponent * math.exp(2 * b * theta)

    value, _ = integrate.quad(
        smooth_part, -half_pi, half_pi, weight="alg", wvar=(exponent, exponent),
        epsabs=0.0, epsrel=1e-12, limit=200,
    )
    return value
