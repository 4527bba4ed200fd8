"""Moments of moments of characteristic polynomials.

Unitary moments of moments are computed three ways: Toeplitz determinants of
Fisher-Hartwig symbols integrated over the singularity positions, exact
restricted tableau counts, and Monte Carlo over Haar matrices. Exact counts
are interpolated into the polynomial in N.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import sympy
from scipy import special
from scipy.signal import fftconvolve

from .ensembles import TWO_PI, Group, phase_batch_size, sample_phase_batch
from .charpoly import log_abs_from_phases
from .errors import BudgetExceededError, ConvergenceError, SingularMatrixError
from .estimates import Estimate
from .symfunc import restricted_rect_count

logger = logging.getLogger(__name__)

# Interpolation needs degree + 3 exact counts; beyond kβ = 4 this is not desk-scale
MAX_EXACT_RANK = 4

# Upper bound on trials per batch in the Monte Carlo route
MONTE_CARLO_BATCH = 256


@dataclass(frozen=True)
class SymbolSpec:
    """Fisher-Hartwig symbol ∏_j |z - e^{iθ_j}|^{2β} on the unit circle."""
    beta: float
    singularities: Tuple[float, ...]

    def __post_init__(self):
        if self.beta <= -0.25:
            raise ValueError(f"beta must be > -1/4, got {self.beta}")
        angles = tuple(float(t) for t in self.singularities)
        if not angles:
            raise ValueError("A symbol needs at least one singularity")
        if any(t < 0 or t >= TWO_PI for t in angles):
            raise ValueError("Singularity angles must lie in [0, 2π)")
        object.__setattr__(self, "singularities", angles)

    @property
    def k(self) -> int:
        return len(self.singularities)

    def evaluate(self, theta) -> np.ndarray:
        """Direct evaluation of the symbol at angles θ."""
        theta = np.asarray(theta, dtype=float)
        value = np.ones_like(theta)
        for t in self.singularities:
            value = value * np.abs(1.0 - np.exp(1j * (theta - t))) ** (2 * self.beta)
        return value


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Coefficients ĥ_j for j = -J..J with a bound on the truncated tail."""
    coeffs: np.ndarray
    tail_bound: float

    @property
    def J(self) -> int:
        return (self.coeffs.size - 1) // 2

    def __getitem__(self, j: int) -> complex:
        return complex(self.coeffs[j + self.J])


@dataclass(frozen=True)
class MomPolynomial:
    """MoM(k, β) as an exact polynomial (coefficients ascending).

    The variable is N for U(N) and x = 2^n for the branching random walk; both
    have degree k²β² - k + 1.
    """
    k: int
    beta: int
    coeffs: Tuple[Fraction, ...]
    variable: str = "N"

    def __post_init__(self):
        expected = self.k ** 2 * self.beta ** 2 - self.k + 1
        if self.degree != expected:
            raise ValueError(f"Expected degree {expected}, got {self.degree}")
        if self.coeffs[-1] <= 0:
            raise ValueError("Leading coefficient must be positive")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1]

    def evaluate(self, N: Union[int, Fraction]) -> Fraction:
        value = Fraction(0)
        for c in reversed(self.coeffs):
            value = value * N + c
        return value

    def as_sympy(self, symbol: Optional[sympy.Symbol] = None) -> sympy.Expr:
        var = symbol if symbol is not None else sympy.Symbol(self.variable)
        return sum(sympy.Rational(c.numerator, c.denominator) * var ** i for i, c in enumerate(self.coeffs))

    def factored(self) -> str:
        return str(sympy.factor(self.as_sympy()))


# --------------------------------------------------------------------------
# Fisher-Hartwig symbols and Toeplitz determinants


def _single_singularity_coeffs(beta: float, theta: float, J: int) -> np.ndarray:
    """Fourier coefficients of |1 - e^{i(φ - θ)}|^{2β}: Γ(1+2β)(-1)^j/(Γ(1+β+j)Γ(1+β-j)) e^{-ijθ}.

    Evaluated through log|Γ| and gammasgn, since the two gamma factors
    under- and overflow separately for large |j|.
    """
    j = np.arange(-J, J + 1)
    a = 1 + beta + j
    b = 1 + beta - j
    poles = ((a <= 0) & (a == np.round(a))) | ((b <= 0) & (b == np.round(b)))
    with np.errstate(invalid="ignore", over="ignore"):
        log_magnitude = special.gammaln(1 + 2 * beta) - special.gammaln(a) - special.gammaln(b)
        sign = np.where(j % 2 == 0, 1.0, -1.0) * special.gammasgn(1 + 2 * beta) * special.gammasgn(a) * special.gammasgn(b)
        values = np.where(poles, 0.0, sign * np.exp(log_magnitude))
    return values * np.exp(-1j * j * theta)


def _single_tail_bound(beta: float, J: int) -> float:
    """Σ_{|j|>J} |c_j| in closed form.

    |c_j| = C Γ(j-β)/Γ(j+β+1) with C = Γ(1+2β)|sin πβ|/π, and the sum over j > J
    telescopes to Γ(J+1-β)/(2β Γ(J+1+β)).
    """
    if float(beta).is_integer() and beta >= 0:
        return 0.0 if J >= beta else math.inf
    if beta <= 0 or J + 1 - beta <= 0:
        return math.inf
    constant = abs(special.gamma(1 + 2 * beta) * math.sin(math.pi * beta)) / math.pi
    one_side = math.exp(special.gammaln(J + 1 - beta) - special.gammaln(J + 1 + beta)) / (2 * beta)
    return 2.0 * constant * one_side


def fh_fourier_coeffs(spec: SymbolSpec, J: int, tolerance: Optional[float] = None) -> FourierCoeffs:
    """Fourier coefficients of the symbol for indices -J..J.

    Each singularity contributes a closed-form sequence; the sequences are
    convolved and the central 2J+1 entries kept.
    """
    if J < 0:
        raise ValueError(f"J must be >= 0, got {J}")
    singles = [_single_singularity_coeffs(spec.beta, t, J) for t in spec.singularities]
    norms = [float(np.abs(s).sum()) for s in singles]
    single_tail = _single_tail_bound(spec.beta, J)
    tail = 0.0
    if single_tail > 0:
        total_norm = float(np.prod(norms))
        tail = sum(single_tail * total_norm / norm for norm in norms) if total_norm else single_tail
    if tolerance is not None and tail > tolerance:
        raise ConvergenceError(f"Fourier tail bound {tail:.3e} exceeds tolerance {tolerance:.3e}; raise J",
                               estimates=[tail])
    product_coeffs = singles[0]
    for s in singles[1:]:
        product_coeffs = fftconvolve(product_coeffs, s)
    center = (product_coeffs.size - 1) // 2
    return FourierCoeffs(coeffs=product_coeffs[center - J:center + J + 1], tail_bound=tail)


def toeplitz_logdet(coeffs: Union[FourierCoeffs, np.ndarray], N: int) -> float:
    """log D_N with D_N = det(ĥ_{j-k})_{j,k<N}; D_0 = 1."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N == 0:
        return 0.0
    values = coeffs.coeffs if isinstance(coeffs, FourierCoeffs) else np.asarray(coeffs, dtype=complex)
    J = (values.size - 1) // 2
    if J < N - 1:
        raise ValueError(f"Coefficients cover |j| <= {J}, need {N - 1}")
    column = values[J:J + N]
    row = values[J::-1][:N]
    matrix = scipy.linalg.toeplitz(column, row)
    sign, logabs = np.linalg.slogdet(matrix)
    if sign == 0 or not np.isfinite(logabs):
        raise SingularMatrixError(f"Toeplitz matrix of order {N} is numerically singular")
    if abs(sign - 1.0) > 1e-6:
        logger.warning(f"Toeplitz determinant of order {N} has phase {sign}")
    return float(logabs)


def toeplitz_determinant(spec: SymbolSpec, N: int, J: Optional[int] = None) -> float:
    J = _default_truncation(N) if J is None else J
    return math.exp(toeplitz_logdet(fh_fourier_coeffs(spec, J), N))


def _default_truncation(N: int) -> int:
    return 8 * N + 64


# --------------------------------------------------------------------------
# Moments of moments


def mom_toeplitz(k: int, beta: float, N: int, quad_nodes: int = 64, tolerance: float = 1e-8,
                 max_doublings: int = 4, threads: int = 1, J: Optional[int] = None) -> float:
    """(2π)^{-(k-1)} ∫ D_N(f_θ) over θ_2..θ_k with θ_1 = 0, by the periodic trapezoid rule.

    The node count doubles until two successive estimates agree to `tolerance`.
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if quad_nodes < 64:
        raise ValueError(f"quad_nodes must be >= 64, got {quad_nodes}")
    k = int(k)
    J = _default_truncation(N) if J is None else J
    if k == 1:
        return math.exp(toeplitz_logdet(fh_fourier_coeffs(SymbolSpec(beta, (0.0,)), J), N))

    cache: Dict[Tuple[Fraction, ...], float] = {}

    def determinant(key: Tuple[Fraction, ...]) -> float:
        angles = (0.0,) + tuple(float(TWO_PI * f) for f in key)
        return math.exp(toeplitz_logdet(fh_fourier_coeffs(SymbolSpec(beta, angles), J), N))

    def estimate(nodes: int) -> float:
        keys = [tuple(Fraction(i, nodes) for i in idx) for idx in product(range(nodes), repeat=k - 1)]
        missing = [key for key in keys if key not in cache]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for key, value in zip(missing, pool.map(determinant, missing)):
                    cache[key] = value
        else:
            for key in missing:
                cache[key] = determinant(key)
        return float(np.mean([cache[key] for key in keys]))

    nodes = quad_nodes
    previous = estimate(nodes)
    history = [previous]
    for _ in range(max_doublings):
        nodes *= 2
        current = estimate(nodes)
        history.append(current)
        if abs(current - previous) <= tolerance * abs(current):
            logger.debug(f"mom_toeplitz(k={k}, beta={beta}, N={N}) converged with {nodes} nodes")
            return current
        previous = current
    raise ConvergenceError(f"Torus quadrature did not converge after {nodes} nodes: "
                           f"last estimates {history[-2]:.10g}, {history[-1]:.10g}", estimates=history[-2:])


def mom_exact_unitary(k: int, beta: int, N: int) -> int:
    """MoM_{U(N)}(k, β) exactly, as a restricted tableau count; U(0) is trivial, so N = 0 gives 1."""
    if min(k, beta) < 1 or N < 0:
        raise ValueError(f"k and beta must be positive and N non-negative, got k={k}, beta={beta}, N={N}")
    return restricted_rect_count(N, k, beta)


def mom_polynomial(k: int, beta: int) -> MomPolynomial:
    """Interpolate exact counts at N = 0..degree and verify at two more points."""
    if k < 1 or beta < 1:
        raise ValueError(f"k and beta must be positive integers, got k={k}, beta={beta}")
    if k * beta > MAX_EXACT_RANK:
        raise BudgetExceededError(f"k*beta = {k * beta} exceeds the exact-count limit {MAX_EXACT_RANK}")
    degree = k ** 2 * beta ** 2 - k + 1
    N = sympy.Symbol("N")
    points = [(n, restricted_rect_count(n, k, beta)) for n in range(degree + 1)]
    expr = sympy.expand(sympy.interpolate(points, N))
    poly = sympy.Poly(expr, N)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    coeffs += [Fraction(0)] * (degree + 1 - len(coeffs))
    for n in (degree + 1, degree + 2):
        expected = restricted_rect_count(n, k, beta)
        got = poly.eval(n)
        if got != expected:
            raise ConvergenceError(f"Interpolated MoM({k},{beta}) gives {got} at N={n}, exact count {expected}",
                                   estimates=[got, expected])
    logger.info(f"MoM({k},{beta}) polynomial of degree {degree} verified")
    return MomPolynomial(k=k, beta=beta, coeffs=tuple(coeffs))


def moment_samples(group: Group, k: float, beta: float, N: int, trials: int, theta_nodes: int,
                   rng: np.random.Generator) -> np.ndarray:
    """g_N(β; A)^k per Haar draw, g_N by the trapezoid rule on `theta_nodes` angles."""
    thetas = TWO_PI * np.arange(theta_nodes) / theta_nodes
    out = np.empty(trials)
    step = min(MONTE_CARLO_BATCH, phase_batch_size(group, N))
    for start in range(0, trials, step):
        size = min(step, trials - start)
        phases = sample_phase_batch(group, N, size, rng)
        log_abs = log_abs_from_phases(phases, thetas)
        log_g = special.logsumexp(2.0 * beta * log_abs, axis=-1) - math.log(theta_nodes)
        out[start:start + size] = np.exp(k * log_g)
    return out


def mom_monte_carlo(group: Group, k: float, beta: float, N: int, trials: int, theta_nodes: int,
                    rng: np.random.Generator) -> Estimate:
    """Sample mean of g_N(β; A)^k with its standard error."""
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    if theta_nodes < 4 * N:
        raise ValueError(f"theta_nodes must be >= 4N = {4 * N}, got {theta_nodes}")
    if group is Group.CIRCULAR_BETA:
        raise ValueError("Moments of moments are sampled for the classical groups only")
    return Estimate.from_samples(moment_samples(group, k, beta, N, trials, theta_nodes, rng))


# --------------------------------------------------------------------------
# Contour integral for shifted averages


def _contour_radii(alphas: np.ndarray, center: complex, n: int) -> np.ndarray:
    reach = float(np.max(np.abs(alphas - center))) if alphas.size else 0.0
    base = max(2.0 * reach, 0.25)
    # distinct radii keep z_q - z_l away from the removable zero at z_q = z_l
    return base * (1.0 + 0.15 * np.arange(n))


def cfkrs_contour_average(alphas: Sequence[complex], m: int, N: int, quad_nodes: int = 64,
                          radii: Optional[Sequence[float]] = None) -> complex:
    """E[∏_{j>m} det(I - A e^{α_j}) ∏_{j<=m} det(I - A* e^{-α_j})] over Haar U(N) by contour integration.

    Each z_l runs over a circle about the mean of the α's; the n-fold integral
    is the product trapezoid rule on those circles.
    """
    alphas = np.asarray(alphas, dtype=complex)
    n = alphas.size
    if n < 1:
        raise ValueError("At least one shift is required")
    if not 0 <= m <= n:
        raise ValueError(f"m must satisfy 0 <= m <= n = {n}, got {m}")
    if quad_nodes < 8:
        raise ValueError(f"quad_nodes must be >= 8, got {quad_nodes}")
    if quad_nodes ** n > 1 << 24:
        raise BudgetExceededError(f"{quad_nodes}^{n} quadrature points is too many")
    center = complex(alphas.mean())
    radii = _contour_radii(alphas, center, n) if radii is None else np.asarray(radii, dtype=float)
    if radii.size != n:
        raise ValueError(f"Expected {n} radii, got {radii.size}")
    reach = float(np.max(np.abs(alphas - center)))
    if np.any(radii <= reach):
        raise ValueError(f"Contour radius violation: every radius must exceed {reach:.3g} to enclose the shifts")
    if radii.max() * 2 >= TWO_PI:
        raise ValueError("Contour radius violation: radii must stay below π to avoid the e^{z_q - z_l} = 1 poles")

    phi = TWO_PI * np.arange(quad_nodes) / quad_nodes
    grids = np.meshgrid(*([phi] * n), indexing="ij")
    unit = [np.exp(1j * g) for g in grids]
    z = [center + r * u for r, u in zip(radii, unit)]
    # dz = i r e^{iφ} dφ; the i^n cancels against (2πi)^n up to (2π)^n, absorbed by the mean
    jacobian = np.ones_like(z[0])
    for r, u in zip(radii, unit):
        jacobian = jacobian * r * u

    integrand = np.exp(-N * sum(z[l] for l in range(m, n))) if m < n else np.ones_like(z[0])
    for i in range(n):
        for j in range(i + 1, n):
            integrand = integrand * (z[j] - z[i]) ** 2
    for l in range(m):
        for q in range(m, n):
            integrand = integrand / (1.0 - np.exp(z[q] - z[l]))
    for l in range(n):
        for q in range(n):
            integrand = integrand / (z[l] - alphas[q])

    mean = complex(np.mean(integrand * jacobian))
    prefactor = (-1) ** (n * (n - 1) // 2) / (math.factorial(m) * math.factorial(n - m))
    prefactor *= complex(np.exp(N * alphas[m:].sum()))
    return prefactor * mean


def shifted_product_samples(alphas: Sequence[complex], m: int, N: int, trials: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo oracle for cfkrs_contour_average: one product per Haar draw."""
    alphas = np.asarray(alphas, dtype=complex)
    z = np.exp(1j * sample_phase_batch(Group.UNITARY, N, trials, rng))
    value = np.ones(trials, dtype=complex)
    for j, a in enumerate(alphas):
        if j < m:
            value *= np.prod(1.0 - np.conj(z) * np.exp(-a), axis=-1)
        else:
            value *= np.prod(1.0 - z * np.exp(a), axis=-1)
    return value
