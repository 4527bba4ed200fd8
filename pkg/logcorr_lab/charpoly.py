"""The log-characteristic-polynomial field and the statistics built on it.

Two evaluation routes are available for Haar unitary fields:

* the eigenphase route sums log|1 - e^{i(θ_j - θ)}| over sampled phases;
* the Verblunsky route runs the Szegő recursion on β = 2 Verblunsky
  coefficients, whose Φ_N has exactly the law of det(z - A) for Haar A.
  It needs no eigendecomposition and is the default for large N.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special, stats
from scipy.optimize import minimize_scalar

from .closed_forms import log_argument_cumulant, log_modulus_cumulant
from .ensembles import (
    TWO_PI, EigenphaseSet, Group, phase_batch_size, sample_phase_batch, trace_power_batch,
    verblunsky_coefficients,
)
from .estimates import Estimate

logger = logging.getLogger(__name__)

# Points this close to an eigenphase are zeros of the polynomial
SINGULAR_DISTANCE = 1e-12

DEFAULT_GRID_FACTOR = 8
DEFAULT_REFINE_ITERS = 30

# Szegő recursion renormalizes every this many steps
RESCALE_EVERY = 32

# Largest (rows x grid points) block evaluated at once
EVALUATION_CHUNK = 1 << 20

REFINE_POINTS = 9
REFINE_CANDIDATES = 3


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """log|P_N| sampled on a grid of the arc [0, L)."""
    thetas: np.ndarray
    values: np.ndarray
    arc_length: float

    def __post_init__(self):
        if self.thetas.shape != self.values.shape:
            raise ValueError("thetas and values must have the same length")
        if not 0 < self.arc_length <= TWO_PI:
            raise ValueError(f"arc_length must lie in (0, 2π], got {self.arc_length}")

    def argmax(self) -> int:
        return int(np.argmax(self.values))


@dataclass(frozen=True, eq=False)
class SecularCoeffs:
    """Coefficients Sc_n of det(I + xA) = Σ Sc_n x^n."""
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("Secular coefficients must be a non-empty vector")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def charpoly(self, theta) -> np.ndarray:
        """P_N(θ) = det(I - e^{-iθ} A) = Σ Sc_n (-e^{-iθ})^n."""
        x = -np.exp(-1j * np.asarray(theta, dtype=float))
        return npoly.polyval(x, self.coeffs)

    def log_abs_charpoly(self, theta) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.charpoly(theta)))


@dataclass(frozen=True)
class CltSummary:
    """Moments and KS distance of standardized log P_N(A, 0)."""
    part: str
    N: int
    trials: int
    normalization: str
    mean: float
    variance: float
    third_moment: float
    ks_distance: float

    def as_dict(self):
        return {
            "part": self.part, "N": self.N, "trials": self.trials,
            "normalization": self.normalization, "mean": self.mean,
            "variance": self.variance, "third_moment": self.third_moment,
            "ks_distance": self.ks_distance,
        }


@dataclass(frozen=True, eq=False)
class PairCorrelation:
    """Histogram of rescaled phase differences, normalized as a pair density."""
    bin_edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n_samples: int
    N: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def mass(self, lower: float, upper: float) -> float:
        """Integral of the density over the bins whose centers lie in [lower, upper]."""
        mask = (self.centers >= lower) & (self.centers <= upper)
        return float(self.density[mask].sum() * self.bin_width)


# --------------------------------------------------------------------------
# Eigenphase route


def _as_phases(eigs: Union[EigenphaseSet, np.ndarray]) -> np.ndarray:
    if isinstance(eigs, EigenphaseSet):
        return eigs.phases
    return np.asarray(eigs, dtype=float)


def log_abs_from_phases(phases: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Σ_j log|2 sin((θ - θ_j)/2)| for phases (..., N) against thetas (G,)."""
    phases = np.asarray(phases, dtype=float)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    lead = phases.shape[:-1]
    flat = phases.reshape(-1, phases.shape[-1])
    out = np.empty((flat.shape[0], thetas.size))
    chunk = max(1, EVALUATION_CHUNK // max(1, phases.shape[-1] * flat.shape[0]))
    for start in range(0, thetas.size, chunk):
        t = thetas[start:start + chunk]
        diff = t[None, :, None] - flat[:, None, :]
        wrapped = np.abs(np.mod(diff + np.pi, TWO_PI) - np.pi)
        with np.errstate(divide="ignore"):
            terms = np.log(2.0 * np.sin(0.5 * wrapped))
        terms[wrapped < SINGULAR_DISTANCE] = -np.inf
        out[:, start:start + chunk] = terms.sum(axis=-1)
    return out.reshape(lead + (thetas.size,))


def log_abs_charpoly(eigs: Union[EigenphaseSet, np.ndarray], theta):
    """log|P_N(A, θ)| = Σ_j log|1 - e^{i(θ_j - θ)}|; -∞ at an eigenphase."""
    phases = _as_phases(eigs)
    values = log_abs_from_phases(phases, np.atleast_1d(theta))
    if np.ndim(theta) == 0:
        return float(values[..., 0]) if values.ndim == 1 else values[..., 0]
    return values


def negative_log_field(eigs: Union[EigenphaseSet, np.ndarray], theta):
    """V_N(A, θ) = -2 log|P_N(A, θ)|; +∞ at an eigenphase."""
    return -2.0 * log_abs_charpoly(eigs, theta)


def grid_thetas(N: int, L: float, grid_factor: int) -> np.ndarray:
    if not 0 < L <= TWO_PI + 1e-15:
        raise ValueError(f"L must lie in (0, 2π], got {L}")
    if grid_factor < 2:
        raise ValueError(f"grid_factor must be >= 2, got {grid_factor}")
    size = grid_factor * N
    return L * np.arange(size) / size


def field_grid(eigs: EigenphaseSet, L: float = TWO_PI, grid_factor: int = DEFAULT_GRID_FACTOR) -> FieldGrid:
    if eigs.size == 0:
        raise ValueError("Cannot evaluate the field of an empty eigenphase set")
    thetas = grid_thetas(eigs.size, L, grid_factor)
    return FieldGrid(thetas=thetas, values=log_abs_from_phases(eigs.phases, thetas), arc_length=float(L))


def _grid_candidates(values: np.ndarray, periodic: bool, count: int = REFINE_CANDIDATES) -> np.ndarray:
    """Indices of the largest strict local maxima, best first (last axis)."""
    left = np.roll(values, 1, axis=-1)
    right = np.roll(values, -1, axis=-1)
    peak = (values > left) & (values > right)
    if not periodic:
        peak[..., 0] = False
        peak[..., -1] = False
    ranked = np.where(peak, values, -np.inf)
    order = np.argsort(-ranked, axis=-1, kind="stable")[..., :count]
    return order


def field_max(eigs: EigenphaseSet, L: float = TWO_PI, grid_factor: int = DEFAULT_GRID_FACTOR,
              refine_iters: int = DEFAULT_REFINE_ITERS) -> Tuple[float, float]:
    """Maximum of log|P_N| on [0, L): grid search then golden-section refinement.

    Returns (theta_star, value). The refined value never falls below the grid maximum.
    """
    if refine_iters < 0:
        raise ValueError(f"refine_iters must be >= 0, got {refine_iters}")
    grid = field_grid(eigs, L, grid_factor)
    best = grid.argmax()
    theta_star, value = float(grid.thetas[best]), float(grid.values[best])
    if refine_iters == 0:
        return theta_star, value

    periodic = math.isclose(L, TWO_PI)
    step = float(grid.thetas[1] - grid.thetas[0]) if grid.thetas.size > 1 else L
    phases = eigs.phases

    def objective(t: float) -> float:
        v = log_abs_from_phases(phases, np.array([t]))[0]
        return -v if np.isfinite(v) else np.inf

    for index in _grid_candidates(grid.values, periodic):
        if not np.isfinite(grid.values[index]):
            continue
        center = float(grid.thetas[index])
        bracket = (center - step, center, center + step)
        try:
            result = minimize_scalar(objective, bracket=bracket, method="golden",
                                     options={"maxiter": refine_iters})
        except ValueError:
            logger.debug(f"Golden bracket rejected around θ={center:.6f}")
            continue
        candidate = -float(result.fun)
        t = float(result.x)
        if not periodic and not 0.0 <= t < L:
            continue
        if np.isfinite(candidate) and candidate > value:
            theta_star, value = float(np.mod(t, TWO_PI)), candidate
    return theta_star, value


# --------------------------------------------------------------------------
# Verblunsky route


def verblunsky_field(alphas: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """log|Φ_N(e^{iθ})| by the Szegő recursion.

    alphas has shape (B, N) (or (N,)); thetas is (G,) or per-row (B, G).
    """
    alphas = np.asarray(alphas, dtype=complex)
    squeeze = alphas.ndim == 1
    alphas = np.atleast_2d(alphas)
    B, N = alphas.shape
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim == 1:
        thetas = np.broadcast_to(thetas, (B, thetas.size))
    G = thetas.shape[1]
    out = np.empty((B, G))
    rows = max(1, EVALUATION_CHUNK // max(1, G))
    for start in range(0, B, rows):
        block = slice(start, start + rows)
        z = np.exp(1j * thetas[block])
        phi = np.ones_like(z)
        phi_star = np.ones_like(z)
        log_scale = np.zeros(z.shape)
        a = alphas[block]
        for k in range(N):
            ak = a[:, k:k + 1]
            z_phi = z * phi
            phi, phi_star = z_phi - np.conj(ak) * phi_star, phi_star - ak * z_phi
            if (k + 1) % RESCALE_EVERY == 0 and k + 1 < N:
                scale = np.abs(phi_star)
                scale[scale == 0.0] = 1.0
                phi /= scale
                phi_star /= scale
                log_scale += np.log(scale)
        with np.errstate(divide="ignore"):
            values = log_scale + np.log(np.abs(phi))
        values[np.abs(phi) == 0.0] = -np.inf
        out[block] = values
    return out[0] if squeeze else out


def field_max_verblunsky(alphas: np.ndarray, L: float = TWO_PI, grid_factor: int = DEFAULT_GRID_FACTOR,
                         refine_iters: int = 6) -> Tuple[np.ndarray, np.ndarray]:
    """Per-row field maxima from Verblunsky coefficients of shape (B, N).

    Each refinement pass lays a 9-point grid over a window around the current top
    candidates and shrinks the window fourfold.
    """
    alphas = np.atleast_2d(np.asarray(alphas, dtype=complex))
    B, N = alphas.shape
    thetas = grid_thetas(N, L, grid_factor)
    values = verblunsky_field(alphas, thetas)
    best_index = np.argmax(values, axis=1)
    best_theta = thetas[best_index].astype(float)
    best_value = values[np.arange(B), best_index]
    if refine_iters <= 0 or thetas.size < 3:
        return best_theta, best_value

    periodic = math.isclose(L, TWO_PI)
    candidates = thetas[_grid_candidates(values, periodic)]
    half_width = float(thetas[1] - thetas[0])
    offsets = np.linspace(-1.0, 1.0, REFINE_POINTS)
    for _ in range(refine_iters):
        local = candidates[:, :, None] + half_width * offsets[None, None, :]
        if not periodic:
            local = np.clip(local, 0.0, np.nextafter(L, 0.0))
        flat = local.reshape(B, -1)
        local_values = verblunsky_field(alphas, flat).reshape(local.shape)
        pick = np.argmax(local_values, axis=2)
        candidates = np.take_along_axis(local, pick[:, :, None], axis=2)[:, :, 0]
        picked_values = np.take_along_axis(local_values, pick[:, :, None], axis=2)[:, :, 0]
        row_best = np.argmax(picked_values, axis=1)
        improved = picked_values[np.arange(B), row_best] > best_value
        best_value = np.where(improved, picked_values[np.arange(B), row_best], best_value)
        best_theta = np.where(improved, candidates[np.arange(B), row_best], best_theta)
        half_width /= 4.0
    return np.mod(best_theta, TWO_PI), best_value


def unitary_field_max_samples(N: int, trials: int, rng: np.random.Generator, L: float = TWO_PI,
                              grid_factor: int = DEFAULT_GRID_FACTOR, refine_iters: Optional[int] = None,
                              method: str = "verblunsky") -> np.ndarray:
    """Maxima of log|P_N| over [0, L) for `trials` independent Haar unitary draws."""
    if method == "verblunsky":
        alphas = verblunsky_coefficients(N, 2.0, trials, rng)
        _, values = field_max_verblunsky(alphas, L, grid_factor, 6 if refine_iters is None else refine_iters)
        return values
    if method == "eigen":
        phases = sample_phase_batch(Group.UNITARY, N, trials, rng)
        iters = DEFAULT_REFINE_ITERS if refine_iters is None else refine_iters
        return np.array([
            field_max(EigenphaseSet(Group.UNITARY, N, row), L, grid_factor, iters)[1] for row in phases
        ])
    raise ValueError(f"Unknown field evaluation method: {method}")


def unitary_field_samples(N: int, thetas: Sequence[float], trials: int, rng: np.random.Generator,
                          method: str = "verblunsky") -> np.ndarray:
    """log|P_N(A, θ)| at fixed angles for independent Haar draws, shape (trials, len(thetas))."""
    thetas = np.asarray(thetas, dtype=float)
    if method == "verblunsky":
        return verblunsky_field(verblunsky_coefficients(N, 2.0, trials, rng), thetas)
    if method == "eigen":
        return log_abs_from_phases(sample_phase_batch(Group.UNITARY, N, trials, rng), thetas)
    raise ValueError(f"Unknown field evaluation method: {method}")


# --------------------------------------------------------------------------
# Secular coefficients


def secular_coefficients_batch(phases: np.ndarray) -> np.ndarray:
    """Expand ∏(1 + e^{iθ_j} x) row-wise; shape (..., N) → (..., N+1)."""
    z = np.exp(1j * np.asarray(phases, dtype=float))
    coeffs = np.zeros(z.shape[:-1] + (z.shape[-1] + 1,), dtype=complex)
    coeffs[..., 0] = 1.0
    for j in range(z.shape[-1]):
        coeffs[..., 1:j + 2] = coeffs[..., 1:j + 2] + z[..., j:j + 1] * coeffs[..., 0:j + 1]
    return coeffs


def secular_coefficients(eigs: EigenphaseSet, method: str = "newton") -> SecularCoeffs:
    """Sc_n = e_n(eigenvalues), by Newton's identities from power traces or by expansion."""
    N = eigs.size
    if method == "expand":
        c = np.poly(eigs.eigenvalues) if N else np.ones(1)
        signs = (-1.0) ** np.arange(N + 1)
        return SecularCoeffs(coeffs=signs * c)
    if method != "newton":
        raise ValueError(f"Unknown secular coefficient method: {method}")
    p = np.array([0j] + [trace_power_batch(eigs.phases, j) for j in range(1, N + 1)])
    e = np.zeros(N + 1, dtype=complex)
    e[0] = 1.0
    for n in range(1, N + 1):
        i = np.arange(1, n + 1)
        e[n] = np.sum((-1.0) ** (i - 1) * e[n - i] * p[i]) / n
    return SecularCoeffs(coeffs=e)


def secular_sum_samples(eta: int, m: int, N: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """|Σ_{j_1+...+j_η=m} Sc_{j_1}...Sc_{j_η}|² for independent Haar draws."""
    if eta < 1:
        raise ValueError(f"eta must be >= 1, got {eta}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m > eta * N:
        return np.zeros(trials)
    coeffs = secular_coefficients_batch(sample_phase_batch(Group.UNITARY, N, trials, rng))
    values = np.array([npoly.polypow(row, eta)[m] for row in coeffs])
    return np.abs(values) ** 2


def secular_sum_moment(eta: int, m: int, N: int, trials: int, rng: np.random.Generator) -> Estimate:
    """Monte Carlo estimate of E|Σ_{j_1+...+j_η=m} Sc_{j_1}...Sc_{j_η}|²; zero beyond degree ηN."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if m > eta * N and m >= 0:
        logger.info(f"m={m} exceeds degree {eta * N}; the sum is identically zero")
        return Estimate(mean=0.0, stderr=0.0, n_samples=trials)
    return Estimate.from_samples(secular_sum_samples(eta, m, N, trials, rng))


# --------------------------------------------------------------------------
# Central limit theorem


def clt_samples(group: Group, N: int, trials: int, rng: np.random.Generator, part: str = "real",
                beta: Optional[float] = None) -> np.ndarray:
    """Unnormalized Re or Im of log P_N(A, 0)."""
    if group is Group.ORTHOGONAL_MINUS:
        raise ValueError("O^-(2N) has a fixed eigenvalue at 1, so log P_N(A, 0) is -∞")
    if part not in ("real", "imag"):
        raise ValueError(f"part must be 'real' or 'imag', got {part}")
    out = np.empty(trials)
    step = phase_batch_size(group, N)
    for start in range(0, trials, step):
        size = min(step, trials - start)
        phases = sample_phase_batch(group, N, size, rng, beta=beta)
        if part == "real":
            out[start:start + size] = log_abs_from_phases(phases, np.zeros(1))[:, 0]
        else:
            # arg(1 - e^{iθ}) = (θ - π)/2 on (0, 2π)
            out[start:start + size] = np.sum(0.5 * (phases - np.pi), axis=-1)
    return out


def clt_normalization(group: Group, N: int, part: str = "real",
                      normalization: Optional[str] = None) -> Tuple[str, float]:
    """(normalization name, scale): "exact" is the finite-N standard deviation (unitary only),
    "asymptotic" is √(½ log N)."""
    if N < 3:
        raise ValueError(f"N must be >= 3 for a non-degenerate normalization, got {N}")
    if normalization is None:
        normalization = "exact" if group is Group.UNITARY else "asymptotic"
    if normalization == "exact":
        if group is not Group.UNITARY:
            raise ValueError("Exact normalization is only available for the unitary group")
        variance = log_modulus_cumulant(N, 2) if part == "real" else log_argument_cumulant(N, 2)
        return normalization, math.sqrt(variance)
    if normalization == "asymptotic":
        return normalization, math.sqrt(0.5 * math.log(N))
    raise ValueError(f"normalization must be 'exact' or 'asymptotic', got {normalization}")


def summarize_clt(values: np.ndarray, part: str, N: int, normalization: str) -> CltSummary:
    """Moments and KS distance to N(0, 1) of already standardized values."""
    values = np.asarray(values, dtype=float)
    ks = stats.kstest(values, "norm")
    return CltSummary(
        part=part, N=N, trials=int(values.size), normalization=normalization,
        mean=float(values.mean()), variance=float(values.var(ddof=1)),
        third_moment=float(np.mean(values ** 3)), ks_distance=float(ks.statistic),
    )


def clt_experiment(group: Group, N: int, trials: int, rng: np.random.Generator, part: str = "real",
                   normalization: Optional[str] = None, beta: Optional[float] = None) -> CltSummary:
    """Moments and KS distance of log P_N(A, 0) standardized by its spread."""
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    normalization, scale = clt_normalization(group, N, part, normalization)
    values = clt_samples(group, N, trials, rng, part=part, beta=beta) / scale
    summary = summarize_clt(values, part, N, normalization)
    logger.info(f"CLT {group.value} N={N} {part}: mean={summary.mean:.4f} var={summary.variance:.4f} "
                f"KS={summary.ks_distance:.4f}")
    return summary


# --------------------------------------------------------------------------
# Covariance


def covariance_samples(N: int, separations: Sequence[float], trials: int, rng: np.random.Generator,
                       method: str = "verblunsky") -> np.ndarray:
    """V_N(0)·V_N(s) per draw and separation, shape (trials, len(separations))."""
    separations = np.asarray(separations, dtype=float)
    if np.any(separations <= 0) or np.any(separations > np.pi):
        raise ValueError("separations must lie in (0, π]")
    thetas = np.concatenate([[0.0], separations])
    v = -2.0 * unitary_field_samples(N, thetas, trials, rng, method=method)
    return v[:, :1] * v[:, 1:]


def covariance_profile(N: int, separations: Sequence[float], trials: int, rng: np.random.Generator,
                       method: str = "verblunsky") -> List[Estimate]:
    """Monte Carlo estimates of E[V_N(0) V_N(s)] for each separation."""
    products = covariance_samples(N, separations, trials, rng, method=method)
    return [Estimate.from_samples(products[:, i]) for i in range(products.shape[1])]


def covariance_prediction(N: int, s):
    """Exact E[V_N(0) V_N(s)] = 2 Σ_{j>=1} min(j, N) cos(js)/j² for Haar U(N).

    The tail j > N is summed in closed form with the Clausen-type series
    Σ_{j>=1} cos(js)/j² = π²/6 - πs/2 + s²/4 on [0, 2π].
    """
    s = np.asarray(s, dtype=float)
    j = np.arange(1, N + 1, dtype=float)
    cos_js = np.cos(np.multiply.outer(s, j))
    head = np.sum(cos_js / j, axis=-1)
    full = np.pi ** 2 / 6 - np.pi * s / 2 + s ** 2 / 4
    tail = N * (full - np.sum(cos_js / j ** 2, axis=-1))
    value = 2.0 * (head + tail)
    return float(value) if value.ndim == 0 else value


# --------------------------------------------------------------------------
# Pair correlation


def dyson_pair_density(x, N: Optional[int] = None):
    """1 - (sin πx / πx)², or its finite-N form 1 - (sin πx / (N sin(πx/N)))²."""
    x = np.asarray(x, dtype=float)
    if N is None:
        value = 1.0 - np.sinc(x) ** 2
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.sin(np.pi * x) / (N * np.sin(np.pi * x / N))
        ratio = np.where(np.isclose(np.mod(x, N), 0.0), 1.0, ratio)
        value = 1.0 - ratio ** 2
    return float(value) if value.ndim == 0 else value


def pair_correlation(samples: Union[Sequence[EigenphaseSet], np.ndarray], bin_width: float,
                     x_max: float) -> PairCorrelation:
    """Pair density of rescaled phases φ = Nθ/2π, differences taken mod N, self-pairs excluded."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    if x_max <= 0:
        raise ValueError(f"x_max must be > 0, got {x_max}")
    if isinstance(samples, np.ndarray):
        phases = np.atleast_2d(samples)
    else:
        samples = list(samples)
        if not samples:
            raise ValueError("pair_correlation needs at least one sample")
        sizes = {s.size for s in samples}
        if len(sizes) != 1:
            raise ValueError(f"All samples must share N, got sizes {sorted(sizes)}")
        groups = {s.group for s in samples}
        if len(groups) != 1 or groups.pop() not in (Group.UNITARY, Group.CIRCULAR_BETA):
            raise ValueError("pair_correlation expects a homogeneous batch of unitary (or CβE) spectra")
        phases = np.stack([s.phases for s in samples])
    count, N = phases.shape
    rescaled = N * phases / TWO_PI
    n_bins = int(math.ceil(x_max / bin_width))
    edges = bin_width * np.arange(n_bins + 1)
    counts = np.zeros(n_bins, dtype=np.int64)
    off_diagonal = ~np.eye(N, dtype=bool)
    rows = max(1, EVALUATION_CHUNK // max(1, N * N))
    for start in range(0, count, rows):
        block = rescaled[start:start + rows]
        diffs = np.mod(block[:, :, None] - block[:, None, :], N)[:, off_diagonal]
        hist, _ = np.histogram(diffs, bins=edges)
        counts += hist
    density = counts / (N * count * bin_width)
    return PairCorrelation(bin_edges=edges, density=density, counts=counts, n_samples=count, N=N)


# --------------------------------------------------------------------------
# Extreme values of independent Gaussians


def iid_max_norming(n: float) -> Tuple[float, float]:
    """(a_n, b_n) with (max of n iid N(0,1) - b_n)/a_n → standard Gumbel."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    root = math.sqrt(2.0 * math.log(n))
    a_n = 1.0 / root
    b_n = root - (math.log(math.log(n)) + math.log(4.0 * math.pi)) / (2.0 * root)
    return a_n, b_n


def gaussian_max_sample(n: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Exact draws of the maximum of n iid N(0,1): Φ^{-1}(U^{1/n}) in log space."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = rng.uniform(size=trials)
    return stats.norm.isf(-np.expm1(np.log(u) / n))


# --------------------------------------------------------------------------
# Free energy of the unitary field


def unitary_free_energy_samples(N: int, betas: Sequence[float], trials: int, rng: np.random.Generator,
                                grid_factor: int = DEFAULT_GRID_FACTOR) -> np.ndarray:
    """log(N g_N(β))/(β log N) per draw, g_N(β) = (1/2π)∫|P_N|^{2β}dθ on a uniform grid."""
    betas = np.asarray(betas, dtype=float)
    if np.any(betas <= 0):
        raise ValueError("betas must be > 0")
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    thetas = grid_thetas(N, TWO_PI, grid_factor)
    field_values = verblunsky_field(verblunsky_coefficients(N, 2.0, trials, rng), thetas)
    log_mean = special.logsumexp(2.0 * betas[None, :, None] * field_values[:, None, :], axis=-1)
    log_mean -= math.log(thetas.size)
    return (math.log(N) + log_mean) / (betas[None, :] * math.log(N))


def free_energy_curve_unitary(N: int, betas: Sequence[float], trials: int, rng: np.random.Generator,
                              grid_factor: int = DEFAULT_GRID_FACTOR) -> List[Estimate]:
    samples = unitary_free_energy_samples(N, betas, trials, rng, grid_factor)
    return [Estimate.from_samples(samples[:, i]) for i in range(samples.shape[1])]
