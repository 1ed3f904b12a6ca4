"""
Spectral summaries, ergodic-measure parameters and Monte Carlo estimators.

A finite spectrum lambda of size N is summarised by all N entries of
max(+-lambda, 0) / N (zero-padded) together with the first two normalised
power sums; the same coordinates parametrise the ergodic invariant
measures. Estimators take point configurations (the nonzero summary
coordinates) and fold them into box counts with standard errors.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .config import (
    DEGENERATE_TOL,
    FOURIER_TAIL_TOL,
    INTERLACING_SLACK,
    MAX_CORRELATION_ORDER,
    SAMPLE_CHUNK_SIZE,
    SUMMARY_TOP_ENTRIES,
)
from .errors import DegenerateSpectrum, DomainError, NotSorted, TruncationInsufficient
from .hua_pickrell import CornerChain
from .pseudo_jacobi import EnsembleParams, scaled_correlation, trace_integral

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]
Box = Tuple[Interval, ...]

_SQUARE_TOL = 1e-12


def _decreasing_nonnegative(values, name: str) -> np.ndarray:
    values = np.array(values, dtype=float).reshape(-1)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must be finite and nonnegative")
    if np.any(np.diff(values) > 0):
        raise DomainError(f"{name} must be weakly decreasing")
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class PointConfiguration:
    """A finite configuration on the punctured line, kept sorted ascending."""

    points: Tuple[float, ...] = ()

    def __post_init__(self):
        points = tuple(sorted(float(p) for p in self.points))
        for p in points:
            if p == 0 or not math.isfinite(p):
                raise DomainError(f"configuration points must be finite and nonzero, got {p}")
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True)
class SpectralSummary:
    a_plus: np.ndarray
    a_minus: np.ndarray
    c: float
    d: float

    def __post_init__(self):
        a_plus = _decreasing_nonnegative(self.a_plus, "a_plus")
        a_minus = _decreasing_nonnegative(self.a_minus, "a_minus")
        squares = float(np.sum(a_plus ** 2) + np.sum(a_minus ** 2))
        if not self.d >= squares - _SQUARE_TOL * max(1.0, squares):
            raise DomainError(f"d = {self.d} is below the sum of squares {squares}")
        object.__setattr__(self, "a_plus", a_plus)
        object.__setattr__(self, "a_minus", a_minus)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))


@dataclass(frozen=True)
class OmegaPoint:
    """Parameters (alpha+, alpha-, gamma1, delta) of an ergodic invariant measure."""

    alpha_plus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    alpha_minus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gamma1: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        alpha_plus = _decreasing_nonnegative(self.alpha_plus, "alpha_plus")
        alpha_minus = _decreasing_nonnegative(self.alpha_minus, "alpha_minus")
        squares = float(np.sum(alpha_plus ** 2) + np.sum(alpha_minus ** 2))
        if not squares <= self.delta + _SQUARE_TOL * max(1.0, squares):
            raise DomainError(f"sum of squared alphas {squares} exceeds delta = {self.delta}")
        object.__setattr__(self, "alpha_plus", alpha_plus)
        object.__setattr__(self, "alpha_minus", alpha_minus)
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def gamma2(self) -> float:
        return self.delta - float(np.sum(self.alpha_plus ** 2) + np.sum(self.alpha_minus ** 2))


# Summaries and configurations


def _padded_entries(values: np.ndarray) -> np.ndarray:
    # every entry is kept so that d equals the sum of squares at finite N
    out = np.zeros(max(SUMMARY_TOP_ENTRIES, values.size))
    out[:values.size] = values
    return out


def spectral_summary(lam: Sequence[float], N: int) -> SpectralSummary:
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1 or lam.size != N:
        raise DomainError(f"expected {N} eigenvalues, got shape {lam.shape}")
    if np.any(np.diff(lam) > 0):
        raise NotSorted("eigenvalues must be sorted descending")
    a_plus = np.maximum(lam, 0.0) / N
    a_minus = np.maximum(-lam[::-1], 0.0) / N
    return SpectralSummary(
        a_plus=_padded_entries(a_plus),
        a_minus=_padded_entries(a_minus),
        c=float(np.sum(lam)) / N,
        d=float(np.sum(lam * lam)) / N ** 2,
    )


def omega_from_summary(summary: SpectralSummary) -> OmegaPoint:
    """The point of Omega with the summary's coordinates."""
    return OmegaPoint(summary.a_plus, summary.a_minus, summary.c, summary.d)


def point_configuration(summary_or_omega: Union[SpectralSummary, OmegaPoint]) -> PointConfiguration:
    if isinstance(summary_or_omega, SpectralSummary):
        plus, minus = summary_or_omega.a_plus, summary_or_omega.a_minus
    else:
        plus, minus = summary_or_omega.alpha_plus, summary_or_omega.alpha_minus
    points = np.concatenate([-minus[minus > 0], plus[plus > 0]])
    return PointConfiguration(tuple(points))


def configuration_from_spectrum(lam: Sequence[float], N: int) -> PointConfiguration:
    """Nonzero points lambda_i / N of a full spectrum."""
    lam = np.asarray(lam, dtype=float) / N
    return PointConfiguration(tuple(lam[lam != 0]))


# Characteristic function of an ergodic measure


def ergodic_fourier(omega: OmegaPoint, r: Sequence[float], truncation: int) -> complex:
    r = np.asarray(r, dtype=float).reshape(-1)
    K = int(truncation)
    if K < 0:
        raise DomainError(f"truncation must be nonnegative, got {truncation}")
    plus, minus = omega.alpha_plus, omega.alpha_minus
    tail_squares = float(np.sum(plus[K:] ** 2) + np.sum(minus[K:] ** 2))
    gamma2 = max(omega.gamma2, 0.0)

    log_value = 0j
    for rj in r:
        tail = tail_squares * rj * rj
        if tail >= FOURIER_TAIL_TOL:
            raise TruncationInsufficient(
                f"tail bound {tail:.3e} at r={rj} needs more than {K} stored entries"
            )
        ap = plus[:K] * rj
        am = minus[:K] * rj
        log_value += 1j * omega.gamma1 * rj - gamma2 * rj * rj
        log_value += np.sum(-1j * ap - np.log(1.0 - 1j * ap))
        log_value += np.sum(1j * am - np.log(1.0 + 1j * am))
    return complex(np.exp(log_value))


# Correlation estimates


@dataclass
class CorrelationEstimate:
    """Mean number of ordered k-tuples of distinct points per box, with standard errors."""

    k: int
    boxes: Tuple[Box, ...]
    means: np.ndarray
    stderr: np.ndarray
    sample_count: int


def _check_boxes(boxes: Iterable, k: int) -> Tuple[Box, ...]:
    checked = []
    for box in boxes:
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        if len(box) != k:
            raise DomainError(f"box {box} has {len(box)} sides, expected {k}", key="boxes")
        for lo, hi in box:
            if not lo < hi:
                raise DomainError(f"interval ({lo}, {hi}) is empty", key="boxes")
            if lo <= 0 <= hi:
                raise DomainError(f"interval ({lo}, {hi}) contains 0", key="boxes")
        checked.append(box)
    if not checked:
        raise DomainError("grid must be nonempty", key="boxes")
    return tuple(checked)


def _ordered_tuple_counts(points: np.ndarray, boxes: Tuple[Box, ...], k: int) -> np.ndarray:
    counts = np.empty(len(boxes))
    for b, box in enumerate(boxes):
        inside = [(points >= lo) & (points <= hi) for lo, hi in box]
        n = [int(np.count_nonzero(mask)) for mask in inside]
        if k == 1:
            counts[b] = n[0]
        elif k == 2:
            counts[b] = n[0] * n[1] - np.count_nonzero(inside[0] & inside[1])
        else:
            n01 = np.count_nonzero(inside[0] & inside[1])
            n02 = np.count_nonzero(inside[0] & inside[2])
            n12 = np.count_nonzero(inside[1] & inside[2])
            n012 = np.count_nonzero(inside[0] & inside[1] & inside[2])
            counts[b] = n[0] * n[1] * n[2] - n01 * n[2] - n02 * n[1] - n12 * n[0] + 2 * n012
    return counts


class CorrelationAccumulator:
    """Running mean and sum of squared deviations of box counts.

    Partial accumulators combine with `merge`; merging in a fixed order gives
    reproducible standard errors.
    """

    def __init__(self, boxes: Iterable, k: int):
        if not 1 <= k <= MAX_CORRELATION_ORDER:
            raise DomainError(f"k must be between 1 and {MAX_CORRELATION_ORDER}, got {k}", key="k")
        self.k = int(k)
        self.boxes = _check_boxes(boxes, self.k)
        self.count = 0
        self.mean = np.zeros(len(self.boxes))
        self.m2 = np.zeros(len(self.boxes))

    def add(self, config: PointConfiguration) -> None:
        counts = _ordered_tuple_counts(config.as_array(), self.boxes, self.k)
        self.count += 1
        delta = counts - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (counts - self.mean)

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if other.k != self.k or other.boxes != self.boxes:
            raise DomainError("cannot merge accumulators over different boxes")
        merged = CorrelationAccumulator(self.boxes, self.k)
        total = self.count + other.count
        merged.count = total
        if total == 0:
            return merged
        delta = other.mean - self.mean
        merged.mean = self.mean + delta * other.count / total
        merged.m2 = self.m2 + other.m2 + delta ** 2 * self.count * other.count / total
        return merged

    def result(self) -> CorrelationEstimate:
        if self.count == 0:
            raise DomainError("no samples accumulated", key="sample_count")
        if self.count > 1:
            stderr = np.sqrt(self.m2 / (self.count - 1) / self.count)
        else:
            stderr = np.zeros(len(self.boxes))
        return CorrelationEstimate(
            k=self.k, boxes=self.boxes, means=self.mean.copy(),
            stderr=stderr, sample_count=self.count,
        )


def estimate_correlation(configs: Sequence[PointConfiguration], boxes: Iterable, k: int) -> CorrelationEstimate:
    """Empirical k-th correlation measure of each box."""
    configs = list(configs)
    total = CorrelationAccumulator(boxes, k)
    for start in range(0, len(configs), SAMPLE_CHUNK_SIZE):
        part = CorrelationAccumulator(total.boxes, k)
        for config in configs[start:start + SAMPLE_CHUNK_SIZE]:
            part.add(config)
        total = total.merge(part)
    logger.debug(f"Estimated order-{k} correlations on {len(total.boxes)} boxes from {total.count} samples")
    return total.result()


# Gaussian-component diagnostic


def scaled_rho1_s0(x, N: int):
    """Density of points lambda / N at s = 0."""
    x = np.asarray(x, dtype=float)
    value = N * N / (math.pi * (1.0 + (N * x) ** 2))
    return float(value) if value.ndim == 0 else value


def small_ball_moment_s0(N: int, epsilon: float) -> float:
    """Integral of x^2 against the s = 0 density over (-epsilon, epsilon)."""
    return 2.0 / math.pi * (epsilon - math.atan(N * epsilon) / N)


@dataclass(frozen=True)
class Gamma2Row:
    N: int
    epsilon: float
    estimate: float
    stderr: float
    closed_form: Optional[float] = None


@dataclass
class Gamma2Report:
    rows: List[Gamma2Row]

    def for_size(self, N: int) -> List[Gamma2Row]:
        return sorted((row for row in self.rows if row.N == N), key=lambda row: -row.epsilon)

    @property
    def decreasing_in_epsilon(self) -> bool:
        """True when every N has estimates nonincreasing as epsilon shrinks."""
        for N in {row.N for row in self.rows}:
            estimates = [row.estimate for row in self.for_size(N)]
            if any(b > a for a, b in zip(estimates, estimates[1:])):
                return False
        return True


def gamma2_diagnostic(samples: Mapping[int, np.ndarray], N_list: Sequence[int],
                      epsilon_list: Sequence[float], s: Optional[complex] = None) -> Gamma2Report:
    """Small-ball second moments of lambda / N for every (N, epsilon).

    `samples[N]` holds one spectrum of size N per row. At s = 0 each row also
    carries the closed form.
    """
    rows = []
    for N in N_list:
        if N not in samples:
            raise DomainError(f"no spectra of size {N} in the samples", key="N_list")
        scaled = np.asarray(samples[N], dtype=float) / N
        if scaled.ndim != 2 or scaled.shape[1] != N:
            raise DomainError(f"spectra of size {N} must have shape (count, {N}), got {scaled.shape}")
        count = scaled.shape[0]
        for epsilon in epsilon_list:
            if not epsilon > 0:
                raise DomainError(f"epsilon must be positive, got {epsilon}", key="eps_list")
            per_sample = np.sum(np.where(np.abs(scaled) < epsilon, scaled ** 2, 0.0), axis=1)
            stderr = float(np.std(per_sample, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
            closed = small_ball_moment_s0(N, epsilon) if s is not None and complex(s) == 0 else None
            rows.append(Gamma2Row(int(N), float(epsilon), float(np.mean(per_sample)), stderr, closed))
    return Gamma2Report(rows)


def square_near_zero(epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """A continuous compactly supported F with F(x) = x^2 for |x| < epsilon."""

    def F(x):
        x = np.abs(np.asarray(x, dtype=float))
        ramp = epsilon ** 2 * np.clip(2.0 - x / epsilon, 0.0, 1.0)
        return np.where(x < epsilon, x * x, ramp)

    return F


def small_ball_sum(a_plus: Sequence[float], a_minus: Sequence[float], F: Callable) -> float:
    """Sum of F(a+_i) + F(-a-_i)."""
    return float(np.sum(F(np.asarray(a_plus, dtype=float))) + np.sum(F(-np.asarray(a_minus, dtype=float))))


def ergodic_functional(omega: OmegaPoint, F: Callable) -> float:
    """Limit of small_ball_sum along sequences converging to omega: the gamma2 mass is added."""
    return small_ball_sum(omega.alpha_plus, omega.alpha_minus, F) + omega.gamma2


# Graph of spectra


def _check_descending(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if np.any(np.diff(values) > 0):
        raise NotSorted(f"{name} must be sorted descending")
    return values


def interlaces(mu: Sequence[float], lam: Sequence[float], slack: float = INTERLACING_SLACK) -> bool:
    """lambda_1 >= mu_1 >= lambda_2 >= ... >= mu_{N-1} >= lambda_N."""
    mu = _check_descending(mu, "mu")
    lam = _check_descending(lam, "lambda")
    if mu.size != lam.size - 1:
        raise DomainError(f"mu must have {lam.size - 1} entries, got {mu.size}")
    tol = slack * max(1.0, float(np.max(np.abs(lam))))
    return bool(np.all(mu <= lam[:-1] + tol) and np.all(mu >= lam[1:] - tol))


def cotransition_density(mu: Sequence[float], lam: Sequence[float]) -> float:
    """Density of the corner spectrum mu given the spectrum lambda.

    (N-1)! V(mu) / V(lambda) on the interlacing set, V the Vandermonde product
    of a descending vector; zero off it.
    """
    mu = _check_descending(mu, "mu")
    lam = _check_descending(lam, "lambda")
    N = lam.size
    if N == 0 or mu.size != N - 1:
        raise DomainError(f"expected len(mu) = len(lambda) - 1 >= 0, got {mu.size} and {N}")
    gaps = -np.diff(lam)
    if np.any(gaps <= DEGENERATE_TOL * max(1.0, float(np.max(np.abs(lam))))):
        raise DegenerateSpectrum(f"lambda has ties: {lam}")
    if not interlaces(mu, lam):
        return 0.0

    with np.errstate(divide="ignore"):
        log_mu = float(np.sum(np.log((mu[:, None] - mu[None, :])[np.triu_indices(N - 1, k=1)])))
    if not math.isfinite(log_mu):
        return 0.0
    log_lam = float(np.sum(np.log((lam[:, None] - lam[None, :])[np.triu_indices(N, k=1)])))
    return math.exp(math.lgamma(N) + log_mu - log_lam)


def regularity_trace(chain: CornerChain, N_list: Sequence[int]) -> List[SpectralSummary]:
    """Summaries of the corner spectra of one matrix for each N in N_list."""
    return [spectral_summary(chain.spectrum(N), N) for N in N_list]


def leading_increments(summaries: Sequence[SpectralSummary]) -> np.ndarray:
    """|change| of (a+_1, a-_1) between consecutive summaries, one row per step."""
    leading = np.array([[s.a_plus[0], s.a_minus[0]] for s in summaries])
    return np.abs(np.diff(leading, axis=0))


def box_integral(box: Box, params: EnsembleParams) -> float:
    """Integral of the scaled k-point correlation function over a box, k <= 3."""
    box = _check_boxes([box], len(box))[0]
    k = len(box)
    if k == 1:
        return trace_integral(box[0], params)
    if k == 2:
        (a, b), (c, d) = box
        value, _ = integrate.dblquad(
            lambda x2, x1: scaled_correlation([x1, x2], params), a, b, c, d, epsabs=1e-10, epsrel=1e-8
        )
        return value
    if k == 3:
        (a, b), (c, d), (e, f) = box
        value, _ = integrate.tplquad(
            lambda x3, x2, x1: scaled_correlation([x1, x2, x3], params), a, b, c, d, e, f,
            epsabs=1e-8, epsrel=1e-6,
        )
        return value
    raise DomainError(f"k must be between 1 and {MAX_CORRELATION_ORDER}, got {k}", key="k")
