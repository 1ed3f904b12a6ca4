"""
Hua-Pickrell random Hermitian matrices.

Matrices are sampled by growing the upper-left corner one row at a time:
given the N-1 corner, the new column and diagonal entry are drawn from the
exact conditional law through a radial Beta-prime variable, a tilted
Cauchy-type variable and a uniform direction. The module also evaluates the
corner densities, the one-step laws and the Hellinger affinities that decide
mutual singularity of the measures for different parameters.
"""

import concurrent.futures as cf
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import (
    EIGEN_BACKWARD_TOL,
    HERMITIAN_TOL,
    INTERLACING_SLACK,
    MAX_N_SAMPLER,
    SAMPLE_CHUNK_SIZE,
)
from .errors import DomainError, EigenFailure, NotInHalfplane
from .specialfns import as_complex, log_gamma_bracket

logger = logging.getLogger(__name__)

_LOG_PI = math.log(math.pi)
_LOG_TWO = math.log(2.0)
_REJECTION_BATCH_CAP = 1 << 16


def _checked_s(s) -> complex:
    s = as_complex(s, "s")
    if not s.real > -0.5:
        raise DomainError(f"Re s must exceed -1/2, got {s.real}", key="s")
    return s


def _checked_dim(N: int, lo: int = 1) -> int:
    if int(N) != N or not lo <= N <= MAX_N_SAMPLER:
        raise DomainError(f"N must be between {lo} and {MAX_N_SAMPLER}, got {N}", key="N")
    return int(N)


@dataclass(frozen=True)
class HermitianMatrix:
    """A finite Hermitian matrix; `corner(k)` is the upper-left k x k block."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise DomainError(f"expected a nonempty square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("matrix entries must be finite")
        scale = float(np.max(np.abs(entries)))
        asymmetry = float(np.max(np.abs(entries - entries.conj().T)))
        if asymmetry > HERMITIAN_TOL * scale:
            raise DomainError(f"matrix is not Hermitian: |X - X*| = {asymmetry:.3e}")
        # exact symmetrisation so downstream eigensolvers see a Hermitian input
        entries = 0.5 * (entries + entries.conj().T)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def corner(self, k: int) -> "HermitianMatrix":
        if not 1 <= k <= self.dim:
            raise DomainError(f"corner size must be between 1 and {self.dim}, got {k}")
        return HermitianMatrix(self.entries[:k, :k])

    def conjugated_by(self, unitary: np.ndarray) -> "HermitianMatrix":
        """U X U*."""
        return HermitianMatrix(unitary @ self.entries @ unitary.conj().T)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues sorted descending."""
        return eigh_checked(self.entries)[0][::-1].copy()


def eigh_checked(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with a backward-error certificate."""
    try:
        values, vectors = linalg.eigh(matrix)
    except linalg.LinAlgError as e:
        raise EigenFailure(f"Hermitian eigensolver failed: {e}") from e
    residual = np.linalg.norm(matrix @ vectors - vectors * values)
    scale = np.linalg.norm(matrix)
    if not residual <= EIGEN_BACKWARD_TOL * scale:
        raise EigenFailure(
            f"eigendecomposition backward error {residual:.3e} exceeds {EIGEN_BACKWARD_TOL} * {scale:.3e}"
        )
    return values, vectors


@dataclass(frozen=True)
class ZetaChain:
    """zeta_1 in R and zeta_2, zeta_3, ... in the right half-plane."""

    zeta1: float
    zetas: Tuple[complex, ...] = ()

    def __post_init__(self):
        zetas = tuple(complex(z) for z in self.zetas)
        for n, zeta in enumerate(zetas, start=2):
            if not zeta.real > 0:
                raise DomainError(f"zeta_{n} = {zeta} is not in the right half-plane")
        object.__setattr__(self, "zeta1", float(self.zeta1))
        object.__setattr__(self, "zetas", zetas)

    def __len__(self) -> int:
        return 1 + len(self.zetas)


class SeededRng:
    """A numpy Generator tied to (seed, stream index, ...).

    The same seed and stream path always produce the same draws.
    """

    def __init__(self, seed: int, stream: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream = tuple(int(i) for i in stream)
        self.generator = np.random.default_rng([self.seed, *self.stream])

    def spawn(self, index: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream + (index,))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


# One-step laws


def _tilted_cauchy(c: float, b: float, gen: np.random.Generator, size: int) -> np.ndarray:
    """Draws from the density proportional to (1 + t^2)^(-c) exp(2 b arctan t), c > 1/2."""
    out = np.empty(size)
    filled = 0
    envelope = math.exp(math.pi * abs(b))
    while filled < size:
        need = size - filled
        batch = min(_REJECTION_BATCH_CAP, max(need, math.ceil(need * envelope)))
        beta = gen.beta(0.5, c - 0.5, size=batch)
        sign = np.where(gen.random(batch) < 0.5, -1.0, 1.0)
        t = sign * np.sqrt(beta / (1.0 - beta))
        if b != 0:
            accept = gen.random(batch) < np.exp(2.0 * b * np.arctan(t) - math.pi * abs(b))
            t = t[accept]
        take = min(need, t.size)
        out[filled:filled + take] = t[:take]
        filled += take
    return out


def _radial_draw(N: int, s: complex, gen: np.random.Generator) -> Tuple[float, float]:
    """(r, t') of one zeta_N draw: r Beta-prime, t' tilted Cauchy of order Re s + N."""
    beta = gen.beta(N - 1, 2.0 * s.real + N)
    radius = beta / (1.0 - beta)
    t_prime = _tilted_cauchy(s.real + N, s.imag, gen, 1)[0]
    return radius, t_prime


def sample_mu1(s, rng: SeededRng) -> float:
    """One draw of the (1,1) entry law."""
    s = _checked_s(s)
    return float(_tilted_cauchy(s.real + 1.0, s.imag, rng.generator, 1)[0])


def sample_muN(N: int, s, rng: SeededRng) -> complex:
    """One draw of zeta_N = r + i t with t = (1 + r) t'."""
    s = _checked_s(s)
    N = _checked_dim(N, lo=2)
    radius, t_prime = _radial_draw(N, s, rng.generator)
    return complex(radius, (1.0 + radius) * t_prime)


def mu1_density(t, s) -> np.ndarray:
    s = _checked_s(s)
    r, b = s.real, s.imag
    log_const = 2.0 * r * _LOG_TWO - _LOG_PI + log_gamma_bracket([s + 1, s.conjugate() + 1], [2 * r + 1]).real
    t = np.asarray(t, dtype=float)
    value = np.exp(log_const - (r + 1.0) * np.log1p(t * t) + 2.0 * b * np.arctan(t))
    return float(value) if value.ndim == 0 else value


def muN_density(zeta, s, N: int) -> np.ndarray:
    """Joint density of zeta_N on the right half-plane with respect to d(Re) d(Im)."""
    s = _checked_s(s)
    N = _checked_dim(N, lo=2)
    r, b = s.real, s.imag
    log_const = (
        (2.0 * r + 2.0 * N - 2.0) * _LOG_TWO
        - _LOG_PI
        + log_gamma_bracket([s + N, s.conjugate() + N], [2 * r + N, N - 1]).real
    )
    zeta = np.asarray(zeta, dtype=complex)
    w = 1.0 + zeta
    radial = np.maximum(zeta.real, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_value = (
            log_const
            - (r + N) * np.log(np.abs(w) ** 2)
            + 2.0 * b * np.angle(w)
            + (N - 2) * np.log(radial)
        )
    value = np.where(zeta.real > 0, np.exp(log_value), 0.0)
    return float(value) if value.ndim == 0 else value


# Corner recursion


def extend_corner(Y: HermitianMatrix, s, rng: SeededRng) -> HermitianMatrix:
    """Draw X of dimension dim(Y) + 1 with upper-left corner Y."""
    s = _checked_s(s)
    n = Y.dim
    N = _checked_dim(n + 1, lo=2)
    gen = rng.generator

    y, vectors = eigh_checked(Y.entries)
    radius, t_prime = _radial_draw(N, s, gen)
    tau = (1.0 + radius) * t_prime

    eta = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    eta /= np.linalg.norm(eta)
    xi_prime = math.sqrt(radius) * eta

    t = tau + float(np.sum(np.abs(xi_prime) ** 2 * y))
    xi = vectors @ (np.sqrt(1.0 + y * y) * xi_prime)

    X = np.empty((N, N), dtype=complex)
    X[:n, :n] = Y.entries
    X[:n, n] = xi
    X[n, :n] = xi.conj()
    X[n, n] = t
    return HermitianMatrix(X)


def sample_matrix(N: int, s, rng: SeededRng) -> HermitianMatrix:
    s = _checked_s(s)
    N = _checked_dim(N)
    X = HermitianMatrix(np.array([[sample_mu1(s, rng)]]))
    for _ in range(1, N):
        X = extend_corner(X, s, rng)
    return X


@dataclass(frozen=True)
class CornerChain:
    """One sampled matrix together with the spectra of all of its corners."""

    matrix: HermitianMatrix
    spectra: Tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.spectra:
            spectra = tuple(self.matrix.corner(k).eigenvalues() for k in range(1, self.matrix.dim + 1))
            object.__setattr__(self, "spectra", spectra)

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def spectrum(self, k: int) -> np.ndarray:
        """Eigenvalues of the k x k corner, descending."""
        if not 1 <= k <= self.dim:
            raise DomainError(f"corner size must be between 1 and {self.dim}, got {k}")
        return self.spectra[k - 1]

    def interlacing_holds(self, slack: float = INTERLACING_SLACK) -> bool:
        for k in range(1, self.dim):
            mu, lam = self.spectra[k - 1], self.spectra[k]
            tol = slack * max(1.0, float(np.max(np.abs(lam))))
            if np.any(mu > lam[:-1] + tol) or np.any(mu < lam[1:] - tol):
                return False
        return True


def sample_corner_chain(N: int, s, rng: SeededRng) -> CornerChain:
    return CornerChain(sample_matrix(N, s, rng))


def zeta_map(X: HermitianMatrix) -> ZetaChain:
    """zeta_N = i t_N + xi_N^* (1 + i theta_{N-1}(X))^(-1) xi_N for N = 2..dim."""
    entries = X.entries
    zetas = []
    for N in range(2, X.dim + 1):
        corner = entries[:N - 1, :N - 1]
        xi = entries[:N - 1, N - 1]
        t = entries[N - 1, N - 1].real
        solved = linalg.solve(np.eye(N - 1) + 1j * corner, xi)
        zetas.append(1j * t + np.vdot(xi, solved))
    return ZetaChain(entries[0, 0].real, tuple(zetas))


# Batched sampling


@dataclass
class SpectrumBatch:
    """Eigenvalues of `count` sampled matrices and of selected corners.

    `spectra[k]` has shape (count, k), rows sorted descending.
    """

    N: int
    s: complex
    seed: int
    spectra: Dict[int, np.ndarray]
    matrices: Optional[List[np.ndarray]] = None

    @property
    def count(self) -> int:
        return self.spectra[self.N].shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectra[self.N]


def _sample_chunk(args) -> Tuple[Dict[int, np.ndarray], Optional[List[np.ndarray]]]:
    N, s, seed, index, count, sizes, keep_matrices = args
    rng = SeededRng(seed).spawn(index)
    spectra = {k: np.empty((count, k)) for k in sizes}
    matrices = [] if keep_matrices else None
    for i in range(count):
        X = sample_matrix(N, s, rng)
        for k in sizes:
            spectra[k][i] = X.corner(k).eigenvalues()
        if keep_matrices:
            matrices.append(X.entries)
    return spectra, matrices


def sample_spectra(N: int, s, seed: int, count: int, workers: int = 1,
                   corners: Sequence[int] = (), keep_matrices: bool = False) -> SpectrumBatch:
    """Sample `count` matrices in chunks of SAMPLE_CHUNK_SIZE.

    Chunk i draws from the stream (seed, i), so the result does not depend on
    the number of workers.
    """
    s = _checked_s(s)
    N = _checked_dim(N)
    if count < 1:
        raise DomainError(f"sample_count must be at least 1, got {count}", key="sample_count")
    for k in corners:
        if not 1 <= k <= N:
            raise DomainError(f"corner size must be between 1 and {N}, got {k}", key="corners")
    sizes = tuple(sorted(set(corners) | {N}))

    jobs = []
    for index, start in enumerate(range(0, count, SAMPLE_CHUNK_SIZE)):
        jobs.append((N, s, seed, index, min(SAMPLE_CHUNK_SIZE, count - start), sizes, keep_matrices))
    logger.info(f"Sampling {count} matrices of size {N} at s={s} in {len(jobs)} chunks")

    if workers > 1 and len(jobs) > 1:
        with cf.ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sample_chunk, jobs))
    else:
        results = [_sample_chunk(job) for job in jobs]

    spectra = {k: np.concatenate([part[0][k] for part in results]) for k in sizes}
    matrices = None
    if keep_matrices:
        matrices = [m for part in results for m in part[1]]
    return SpectrumBatch(N=N, s=s, seed=int(seed), spectra=spectra, matrices=matrices)


# Densities


def _log_const_N(s: complex, N: int) -> float:
    r = s.real
    total = 0.0
    for j in range(1, N + 1):
        total += j * _LOG_PI - (2.0 * r + 2.0 * j - 2.0) * _LOG_TWO
        total += log_gamma_bracket([2 * r + j], [s + j, s.conjugate() + j]).real
    return total


def log_density_msN(X: HermitianMatrix, s) -> float:
    """log of the corner density at X with respect to Lebesgue measure on H(N)."""
    s = _checked_s(s)
    N = X.dim
    x = eigh_checked(X.entries)[0]
    log_f = float(np.sum(-(s.real + N) * np.log1p(x * x) + 2.0 * s.imag * np.arctan(x)))
    return log_f - _log_const_N(s, N)


def density_msN(X: HermitianMatrix, s) -> float:
    return math.exp(log_density_msN(X, s))


# Hellinger affinity and Kakutani products


def _log_affinity(s1: complex, s2: complex, N: int) -> float:
    s = 0.5 * (s1 + s2)
    half = 0.5 * log_gamma_bracket(
        [s1 + N, s1.conjugate() + N, s2 + N, s2.conjugate() + N],
        [2 * s1.real + N, 2 * s2.real + N],
    )
    return (half + log_gamma_bracket([2 * s.real + N], [s + N, s.conjugate() + N])).real


def hellinger_affinity(s1, s2, N: int) -> float:
    """Hellinger affinity of the zeta_N laws for parameters s1 and s2."""
    s1, s2 = _checked_s(s1), _checked_s(s2)
    if int(N) != N or N < 2:
        raise DomainError(f"N must be at least 2, got {N}", key="N")
    if s1 == s2:
        return 1.0
    return min(1.0, math.exp(_log_affinity(s1, s2, int(N))))


def extrapolated_hellinger_rate(s1, s2, N_list: Sequence[int] = (100, 200, 400)) -> float:
    """Limit of N (1 - affinity) by Richardson extrapolation in 1/N over N, 2N, 4N."""
    s1, s2 = _checked_s(s1), _checked_s(s2)
    if len(N_list) != 3 or N_list[1] != 2 * N_list[0] or N_list[2] != 2 * N_list[1]:
        raise DomainError(f"N_list must be (N, 2N, 4N), got {tuple(N_list)}", key="N_list")
    g = [-N * math.expm1(_log_affinity(s1, s2, N)) for N in N_list]
    first = 2.0 * g[1] - g[0]
    second = 2.0 * g[2] - g[1]
    return (4.0 * second - first) / 3.0


@dataclass
class KakutaniReport:
    s1: complex
    s2: complex
    N: np.ndarray
    log_products: np.ndarray
    slope: float
    intercept: float
    extrapolated_rate: float

    @property
    def products(self) -> np.ndarray:
        return np.exp(self.log_products)

    @property
    def expected_slope(self) -> float:
        return -abs(self.s1 - self.s2) ** 2 / 4.0


def kakutani_divergence_report(s1, s2, N_max: int) -> KakutaniReport:
    """Partial products of affinities for N = 2..N_max and the fitted decay exponent.

    The slope comes from a least-squares fit of log(product) against log N
    over the last decade [N_max / 10, N_max].
    """
    s1, s2 = _checked_s(s1), _checked_s(s2)
    if int(N_max) != N_max or N_max < 20:
        raise DomainError(f"N_max must be at least 20, got {N_max}", key="N_max")
    Ns = np.arange(2, int(N_max) + 1)
    if s1 == s2:
        log_products = np.zeros(Ns.size)
        rate = 0.0
    else:
        log_products = np.cumsum([_log_affinity(s1, s2, int(N)) for N in Ns])
        rate = extrapolated_hellinger_rate(s1, s2)
    window = Ns >= N_max / 10
    slope, intercept = np.polyfit(np.log(Ns[window]), log_products[window], 1)
    logger.debug(f"Kakutani fit for s1={s1}, s2={s2}: slope={slope:.6f}")
    return KakutaniReport(
        s1=s1, s2=s2, N=Ns, log_products=log_products,
        slope=float(slope), intercept=float(intercept), extrapolated_rate=rate,
    )


# Block determinant identity for complex powers


def matrix_power(A: np.ndarray, z) -> np.ndarray:
    """A^z through the eigendecomposition with principal logarithms of the eigenvalues."""
    A = np.asarray(A, dtype=complex)
    z = as_complex(z, "z")
    if z == 1:
        return A
    values, vectors = linalg.eig(A)
    if np.any(np.abs(values) == 0):
        raise NotInHalfplane("matrix has a zero eigenvalue")
    powers = np.exp(z * np.log(values))
    return vectors @ np.diag(powers) @ linalg.inv(vectors)


def _check_halfplane(A: np.ndarray) -> None:
    smallest = np.linalg.eigvalsh(A + A.conj().T)[0]
    if not smallest > 0:
        raise NotInHalfplane(f"A + A* is not positive definite (smallest eigenvalue {smallest:.3e})")


def block_det_identity_check(A, z, split: int) -> float:
    """Relative gap between det(A^z) and det(A11^z) det(S^z), S the Schur complement of A11."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    if not 1 <= split < n:
        raise DomainError(f"split must be between 1 and {n - 1}, got {split}", key="split")
    _check_halfplane(A)

    a11, a12 = A[:split, :split], A[:split, split:]
    a21, a22 = A[split:, :split], A[split:, split:]
    schur = a22 - a21 @ linalg.solve(a11, a12)

    lhs = np.linalg.det(matrix_power(A, z))
    rhs = np.linalg.det(matrix_power(a11, z)) * np.linalg.det(matrix_power(schur, z))
    scale = max(abs(lhs), abs(rhs))
    if scale == 0:
        return 0.0
    return float(abs(lhs - rhs) / scale)


def random_halfplane_matrix(n: int, rng: SeededRng, spread: float = 0.3) -> np.ndarray:
    """Identity plus a small complex perturbation, with A + A* positive definite."""
    gen = rng.generator
    perturbation = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    perturbation *= spread / max(1.0, np.linalg.norm(perturbation, 2))
    return np.eye(n) + perturbation

