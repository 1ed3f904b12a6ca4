"""
N -> infinity correlation kernel of the pseudo-Jacobi ensemble.

The kernel is evaluated through the reduced functions of y = 1/x

    rho(y)   = exp(-iy + pi Im s sgn(y)/2) 1F1[s; 2Re s+1; 2iy]
    kappa(y) = exp(-iy + pi Im s sgn(y)/2) 1F1[s+1; 2Re s+2; 2iy]

so that P~(x) = |2y|^Re s rho(y), Q(x) = 2y |2y|^Re s kappa(y) and

    K(x1, x2) = S(y1, y2) |y1 y2|^Re s y1 y2,
    S(y1, y2) = C 2^(2Re s+1) Re(y2 rho1 kappa2 - y1 kappa1 rho2) / (y2 - y1).

S is analytic in y on either half-line, which is what the Fredholm
determinants below are discretized on.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy import special

from .config import (
    DIAGONAL_SWITCH,
    FREDHOLM_DEFAULT_ORDER,
    FREDHOLM_MAX_ORDER,
    IMAG_LEAK_NORM,
    IMAG_LEAK_PAINLEVE,
    IMAG_LEAK_POLY,
    LIMIT_X_FLOOR,
    PAINLEVE_STEP_FACTOR,
)
from .ergodic import PointConfiguration
from .errors import DomainError, ImaginaryLeak, NonPositive, NotDefined
from .pseudo_jacobi import EnsembleParams, cd_kernel_matrix
from .specialfns import as_complex, bessel_j, kummer_1f1, kummer_1f1_pair, log_gamma_bracket

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LimitKernelParams:
    s: complex

    def __post_init__(self):
        s = as_complex(self.s, "s")
        if not s.real > -0.5:
            raise DomainError(f"Re s must exceed -1/2, got {s.real}", key="s")
        object.__setattr__(self, "s", s)

    @property
    def re(self) -> float:
        return self.s.real

    @property
    def im(self) -> float:
        return self.s.imag

    def conjugate(self) -> "LimitKernelParams":
        return LimitKernelParams(self.s.conjugate())


def _check_floor(x) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(np.abs(xs) >= LIMIT_X_FLOOR)):
        raise DomainError(f"limit kernel needs |x| >= {LIMIT_X_FLOOR}, got {xs[np.abs(xs) < LIMIT_X_FLOOR]}")
    return xs


def _real_part(value: complex, scale: float, what: str) -> float:
    if abs(value.imag) > IMAG_LEAK_POLY * max(scale, 1e-300):
        raise ImaginaryLeak(f"{what} kept imaginary part {value.imag:.3e} against {scale:.3e}")
    return value.real


def log_prefactor(params: LimitKernelParams) -> float:
    """log of (1/2pi) Gamma[s+1, s*+1; 2Re s+1, 2Re s+2]."""
    r, s = params.re, params.s
    log_value = -math.log(2.0 * math.pi) + log_gamma_bracket((s + 1, s.conjugate() + 1), (2 * r + 1, 2 * r + 2))
    residue = math.remainder(log_value.imag, 2.0 * math.pi)
    if abs(residue) > IMAG_LEAK_NORM:
        raise ImaginaryLeak(f"limit kernel prefactor has imaginary residue {residue:.3e}")
    return log_value.real


# Reduced functions of y = 1/x


@dataclass
class _Reduced:
    y: np.ndarray
    rho: np.ndarray
    kappa: np.ndarray
    d_rho: np.ndarray
    d_kappa: np.ndarray


def _reduced_functions(y, params: LimitKernelParams) -> _Reduced:
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    r, s = params.re, params.s
    out = np.empty((4, ys.size), dtype=complex)
    for idx, yv in enumerate(ys):
        phase = np.exp(-1j * yv + 0.5 * math.pi * params.im * np.sign(yv))
        f, df = kummer_1f1_pair(s, 2 * r + 1, 2j * yv)
        g, dg = kummer_1f1_pair(s + 1, 2 * r + 2, 2j * yv)
        out[0, idx] = phase * f
        out[1, idx] = phase * g
        out[2, idx] = phase * (-1j * f + 2j * df)
        out[3, idx] = phase * (-1j * g + 2j * dg)
    return _Reduced(ys, out[0], out[1], out[2], out[3])


def _s_matrix(a: _Reduced, b: _Reduced, params: LimitKernelParams) -> np.ndarray:
    """S(y_a, y_b) on the outer product of two node sets."""
    scale_const = math.exp(log_prefactor(params)) * 2.0 ** (2 * params.re + 1)
    ya, yb = a.y[:, None], b.y[None, :]
    first = yb * a.rho[:, None] * b.kappa[None, :]
    second = ya * a.kappa[:, None] * b.rho[None, :]
    numer = first - second
    diff = yb - ya
    near = np.abs(diff) < DIAGONAL_SWITCH * (1.0 + np.maximum(np.abs(ya), np.abs(yb)))

    terms = np.abs(first) + np.abs(second)
    leak = (~near) & (np.abs(numer.imag) > IMAG_LEAK_POLY * np.maximum(terms, 1e-300))
    if np.any(leak):
        raise ImaginaryLeak(f"limit kernel numerator kept an imaginary part at {np.count_nonzero(leak)} pairs")
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(near, 0.0, numer.real / diff)

    rows, cols = np.nonzero(near)
    if rows.size:
        mids = 0.5 * (a.y[rows] + b.y[cols])
        red = _reduced_functions(mids, params)
        confluent = red.rho * red.kappa + red.y * (red.rho * red.d_kappa - red.kappa * red.d_rho)
        size = np.abs(red.rho * red.kappa) + np.abs(red.y) * (
            np.abs(red.rho * red.d_kappa) + np.abs(red.kappa * red.d_rho))
        if np.any(np.abs(confluent.imag) > IMAG_LEAK_POLY * np.maximum(size, 1e-300)):
            raise ImaginaryLeak("confluent limit kernel kept an imaginary part")
        values[rows, cols] = confluent.real
    return scale_const * values


# Functions P, Q and P~


def fn_P_tilde(x: float, params: LimitKernelParams) -> complex:
    """P~(x) = |2/x|^Re s exp(-i/x + pi Im s sgn(x)/2) 1F1[s; 2Re s+1; 2i/x] (complex valued)."""
    y = 1.0 / _check_floor(x)[0]
    red = _reduced_functions(y, params)
    return complex(abs(2 * y) ** params.re * red.rho[0])


def fn_Q(x: float, params: LimitKernelParams) -> float:
    y = 1.0 / _check_floor(x)[0]
    red = _reduced_functions(y, params)
    value = 2 * y * abs(2 * y) ** params.re * red.kappa[0]
    return _real_part(complex(value), abs(value), f"Q({x})")


def fn_P(x: float, params: LimitKernelParams) -> float:
    """P(x) = |2/x|^Re s exp(-i/x + pi Im s sgn(x)/2) 1F1[s; 2Re s; 2i/x]."""
    x = float(_check_floor(x)[0])
    if params.s == 0:
        return math.cos(1.0 / x)
    if params.re == 0:
        raise NotDefined(f"P is singular on Re s = 0 for s={params.s}; use fn_P_tilde")
    y = 1.0 / x
    phase = np.exp(-1j * y + 0.5 * math.pi * params.im * np.sign(y))
    value = abs(2 * y) ** params.re * phase * kummer_1f1(params.s, 2 * params.re, 2j * y)
    return _real_part(complex(value), abs(value), f"P({x})")


def fn_P_bessel(x: float, s: float) -> float:
    """Real-s Bessel form 2^(2s-1/2) Gamma(s+1/2) |x|^(-1/2) J_{s-1/2}(1/|x|)."""
    x = float(_check_floor(x)[0])
    return 2 ** (2 * s - 0.5) * special.gamma(s + 0.5) * abs(x) ** -0.5 * bessel_j(s - 0.5, 1 / abs(x))


def fn_Q_bessel(x: float, s: float) -> float:
    """Real-s Bessel form sgn(x) 2^(2s+3/2) Gamma(s+3/2) |x|^(-1/2) J_{s+1/2}(1/|x|)."""
    x = float(_check_floor(x)[0])
    magnitude = 2 ** (2 * s + 1.5) * special.gamma(s + 1.5) * abs(x) ** -0.5 * bessel_j(s + 0.5, 1 / abs(x))
    return math.copysign(magnitude, x)


def whittaker_M(kappa, mu, t) -> complex:
    """M_{kappa,mu}(t) = exp(-t/2) t^(mu+1/2) 1F1[mu-kappa+1/2; 1+2mu; t], principal power."""
    kappa = as_complex(kappa, "kappa")
    mu = as_complex(mu, "mu")
    t = as_complex(t, "t")
    power = np.exp((mu + 0.5) * np.log(t)) if t != 0 else 0j
    return complex(np.exp(-t / 2) * power * kummer_1f1(mu - kappa + 0.5, 1 + 2 * mu, t))


def fn_P_whittaker(x: float, params: LimitKernelParams) -> float:
    x = float(_check_floor(x)[0])
    s, sign = params.s, math.copysign(1.0, x)
    value = np.exp(-0.5j * math.pi * s * sign) * whittaker_M(-1j * params.im, params.re - 0.5, 2j / x)
    return _real_part(complex(value), abs(value), f"P({x}) via Whittaker")


def fn_Q_whittaker(x: float, params: LimitKernelParams) -> float:
    x = float(_check_floor(x)[0])
    s, sign = params.s, math.copysign(1.0, x)
    value = np.exp(-0.5j * math.pi * (s * sign + 1)) * whittaker_M(-1j * params.im, params.re + 0.5, 2j / x)
    return _real_part(complex(value), abs(value), f"Q({x}) via Whittaker")


# Kernel


def kernel_inf_matrix(points: Sequence[float], params: LimitKernelParams) -> np.ndarray:
    """Symmetric matrix [K^(s,inf)(x_i, x_j)]."""
    xs = _check_floor(points)
    ys = 1.0 / xs
    red = _reduced_functions(ys, params)
    values = _s_matrix(red, red, params)

    # Near-diagonal switch is stated in x
    diff = xs[:, None] - xs[None, :]
    near_x = np.abs(diff) < DIAGONAL_SWITCH * (1.0 + np.maximum(np.abs(xs)[:, None], np.abs(xs)[None, :]))
    rows, cols = np.nonzero(near_x & (diff != 0))
    if rows.size:
        mids = 0.5 * (ys[rows] + ys[cols])
        mid_red = _reduced_functions(mids, params)
        values[rows, cols] = np.diag(_s_matrix(mid_red, mid_red, params))

    weights = np.abs(ys) ** params.re * ys
    kernel = values * weights[:, None] * weights[None, :]
    return np.triu(kernel) + np.triu(kernel, 1).T


def kernel_inf(x1: float, x2: float, params: LimitKernelParams) -> float:
    lo, hi = sorted((float(x1), float(x2)))
    return float(kernel_inf_matrix([lo, hi], params)[0, 1])


def sine_kernel_form(x1: float, x2: float) -> float:
    """K^(0,inf) written through the sine: sin(1/x2 - 1/x1) / (pi (x1 - x2))."""
    if x1 == x2:
        return 1.0 / (math.pi * x1 * x1)
    return math.sin(1.0 / x2 - 1.0 / x1) / (math.pi * (x1 - x2))


# Sine coordinates y = -1/(pi x)


def to_sine_coordinates(config: PointConfiguration) -> PointConfiguration:
    return PointConfiguration(tuple(-1.0 / (math.pi * config.as_array())))


def from_sine_coordinates(config: PointConfiguration) -> PointConfiguration:
    """Inverse of to_sine_coordinates; the map y = -1/(pi x) is an involution."""
    return to_sine_coordinates(config)


def kernel_in_sine_coordinates(y1: float, y2: float, params: LimitKernelParams) -> float:
    """Kernel transported to y = -1/(pi x) with its Jacobian and the sign gauge sgn(y1 y2) removed."""
    x1, x2 = -1.0 / (math.pi * y1), -1.0 / (math.pi * y2)
    jacobian = 1.0 / (math.pi * abs(y1 * y2))
    return math.copysign(1.0, y1 * y2) * jacobian * kernel_inf(x1, x2, params)


# Fredholm determinants


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights for the integral of g(y) y^exponent over an interval."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: Tuple[float, float]
    exponent: float = field(default=0.0)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        lo, hi = self.interval
        if nodes.shape != weights.shape:
            raise DomainError("nodes and weights differ in length")
        if nodes.size and (np.any(np.diff(nodes) <= 0) or nodes[0] <= lo or nodes[-1] >= hi):
            raise DomainError("nodes must increase strictly inside the interval")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        e = self.exponent
        expected = hi - lo if e == 0 else (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
        if nodes.size and abs(weights.sum() - expected) > 1e-12 * abs(expected):
            raise DomainError(f"weights sum to {weights.sum()!r}, expected {expected!r}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


def gauss_legendre_grid(lo: float, hi: float, order: int) -> QuadratureGrid:
    u, w = special.roots_legendre(order)
    half = 0.5 * (hi - lo)
    return QuadratureGrid(lo + half * (u + 1.0), half * w, (lo, hi))


def gauss_jacobi_grid(t: float, exponent: float, order: int) -> QuadratureGrid:
    """Gauss rule on (0, t) for the weight y^exponent."""
    u, w = special.roots_jacobi(order, 0.0, exponent)
    half = 0.5 * t
    return QuadratureGrid(half * (u + 1.0), half ** (exponent + 1) * w, (0.0, t), exponent)


def _nystrom_logdet(grid: QuadratureGrid, params: LimitKernelParams, extra_power: bool) -> float:
    red = _reduced_functions(grid.nodes, params)
    values = _s_matrix(red, red, params)
    values = 0.5 * (values + values.T)
    root = np.sqrt(grid.weights)
    if extra_power:
        root = root * np.abs(grid.nodes) ** params.re
    matrix = np.eye(grid.nodes.size) - root[:, None] * values * root[None, :]
    sign, logdet = np.linalg.slogdet(matrix)
    if sign <= 0:
        raise NonPositive(f"Fredholm determinant is not positive on {grid.interval} (order {grid.nodes.size})")
    return float(logdet)


def log_fredholm_det(params: LimitKernelParams, interval: Tuple[float, float],
                     order: int = FREDHOLM_DEFAULT_ORDER) -> float:
    """log det(1 - K^(s,inf) restricted to an interval of one sign)."""
    lo, hi = float(interval[0]), float(interval[1])
    if not 1 <= order <= FREDHOLM_MAX_ORDER:
        raise DomainError(f"Nystrom order must be between 1 and {FREDHOLM_MAX_ORDER}, got {order}")
    if lo > hi:
        raise DomainError(f"interval ({lo}, {hi}) is reversed")
    if lo == hi:
        return 0.0
    if hi <= 0:
        # K(-x1, -x2; s) = K(x1, x2; conj s)
        return log_fredholm_det(params.conjugate(), (-hi, -lo), order)
    if lo < LIMIT_X_FLOOR:
        raise DomainError(f"interval must lie in [{LIMIT_X_FLOOR}, inf) or its mirror, got ({lo}, {hi})")

    if math.isinf(hi):
        grid = gauss_jacobi_grid(1.0 / lo, 2 * params.re, order)
        logdet = _nystrom_logdet(grid, params, extra_power=False)
    else:
        grid = gauss_legendre_grid(1.0 / hi, 1.0 / lo, order)
        logdet = _nystrom_logdet(grid, params, extra_power=True)
    logger.debug(f"log det on ({lo}, {hi}) at order {order}: {logdet:.15g}")
    return logdet


def fredholm_det(params: LimitKernelParams, interval: Tuple[float, float],
                 order: int = FREDHOLM_DEFAULT_ORDER) -> float:
    return math.exp(log_fredholm_det(params, interval, order))


def fredholm_det_estimate(params: LimitKernelParams, interval: Tuple[float, float],
                          order: int = FREDHOLM_DEFAULT_ORDER) -> Tuple[float, float]:
    """Determinant at the given order and its change when the order is doubled."""
    value = fredholm_det(params, interval, order)
    refined = fredholm_det(params, interval, min(2 * order, FREDHOLM_MAX_ORDER))
    return value, abs(refined - value)


# sigma-Painleve V


@dataclass(frozen=True)
class SigmaValues:
    t: float
    sigma: float
    d_sigma: float
    dd_sigma: float


def _richardson(coarse: float, fine: float, order: int) -> float:
    factor = 2.0 ** order
    return (factor * fine - coarse) / (factor - 1.0)


def sigma_function(t: float, params: LimitKernelParams, h: float = None,
                   order: int = FREDHOLM_DEFAULT_ORDER) -> SigmaValues:
    """sigma(t) = t d/dt log det(1 - K on (1/t, inf)) and its first two derivatives."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    h = PAINLEVE_STEP_FACTOR * t if h is None else h
    if not 0 < 4 * h < t:
        raise DomainError(f"step {h} too large for t={t}")

    def log_det(tt: float) -> float:
        return log_fredholm_det(params, (1.0 / tt, math.inf), order)

    L = {k: log_det(t + k * h) for k in (-4, -2, -1, 0, 1, 2, 4)}

    def first(k: int) -> float:
        return (L[k] - L[-k]) / (2 * k * h)

    def second(k: int) -> float:
        return (L[k] - 2 * L[0] + L[-k]) / (k * h) ** 2

    d1 = (16 * _richardson(first(2), first(1), 2) - _richardson(first(4), first(2), 2)) / 15
    d2 = (16 * _richardson(second(2), second(1), 2) - _richardson(second(4), second(2), 2)) / 15
    d3_fine = (L[2] - 2 * L[1] + 2 * L[-1] - L[-2]) / (2 * h ** 3)
    d3_coarse = (L[4] - 2 * L[2] + 2 * L[-2] - L[-4]) / (2 * (2 * h) ** 3)
    d3 = _richardson(d3_coarse, d3_fine, 2)

    return SigmaValues(t, t * d1, d1 + t * d2, 2 * d2 + t * d3)


def painleve_residual(t: float, params: LimitKernelParams, h: float = None,
                      order: int = FREDHOLM_DEFAULT_ORDER) -> float:
    """Relative residual of
    -(t sigma'')^2 = (2(t sigma' - sigma) + sigma'^2 + i(s* - s) sigma')^2
                     - sigma'^2 (sigma' - 2is)(sigma' + 2is*).
    """
    sv = sigma_function(t, params, h, order)
    s = params.s
    sigma, ds, dds = complex(sv.sigma), complex(sv.d_sigma), complex(sv.dd_sigma)
    lhs = -(t * dds) ** 2
    rhs = (2 * (t * ds - sigma) + ds ** 2 + 1j * (s.conjugate() - s) * ds) ** 2 \
        - ds ** 2 * (ds - 2j * s) * (ds + 2j * s.conjugate())
    gap = lhs - rhs
    magnitude = max(abs(lhs), abs(rhs))
    if abs(gap.imag) > IMAG_LEAK_PAINLEVE * max(magnitude, 1e-300):
        raise ImaginaryLeak(f"sigma-PV residual kept imaginary part {gap.imag:.3e} at t={t}")
    return abs(gap.real) / magnitude if magnitude > 0 else 0.0


# Finite-N to limit comparison


def kernel_convergence_gap(x1: float, x2: float, params: LimitKernelParams, N: int,
                           relative: bool = False) -> float:
    """|(sgn x1 sgn x2)^N N K^(s,N)(N x1, N x2) - K^(s,inf)(x1, x2)|.

    With relative=True the gap is divided by max(1, |K^(s,inf)|).
    """
    return float(kernel_convergence_gap_matrix([x1, x2], params, N, relative)[0, 1])


def scaled_finite_kernel_matrix(points: Sequence[float], params: LimitKernelParams, N: int) -> np.ndarray:
    """[(sgn x_i sgn x_j)^N N K^(s,N)(N x_i, N x_j)]."""
    xs = _check_floor(points)
    finite = cd_kernel_matrix(N * xs, EnsembleParams(params.s, N))
    signs = np.sign(xs)
    return np.outer(signs, signs) ** N * N * finite


def kernel_convergence_gap_matrix(points: Sequence[float], params: LimitKernelParams, N: int,
                                  relative: bool = False) -> np.ndarray:
    limit = kernel_inf_matrix(points, params)
    gap = np.abs(scaled_finite_kernel_matrix(points, params, N) - limit)
    if relative:
        gap = gap / np.maximum(1.0, np.abs(limit))
    return gap
