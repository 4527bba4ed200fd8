"""Closed forms and asymptotic predictors for moments, maxima and free energies.

Exact rationals (``fractions.Fraction``) are returned wherever the inputs make
the answer rational; everything else is evaluated in double precision with
scipy special functions, and mpmath for the Barnes G-function.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy import special

from .ensembles import Group

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

# Inner Euler-factor sums stop once the remaining tail is below this
ARITHMETIC_TAIL_TOLERANCE = 1e-14


class Regime(Enum):
    """Regimes of the moments of moments in the parameter k·β²."""
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class MomPrediction:
    """Predicted leading order of MoM(k, β) ~ coefficient · N^exponent [· log N]."""
    regime: Regime
    exponent: float
    coefficient: Optional[float] = None
    modulating_factor: Optional[str] = None
    conjectural: bool = False

    def evaluate(self, N: int) -> Optional[float]:
        if self.coefficient is None:
            return None
        value = self.coefficient * float(N) ** self.exponent
        if self.modulating_factor == "log N":
            value *= math.log(N)
        return value


def _is_integral(x: Number) -> bool:
    return float(x).is_integer()


def _as_exact(x: Number) -> Optional[Fraction]:
    """Exact value for ints/Fractions and floats that are dyadic-exact."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float) and math.isfinite(x):
        return Fraction(x)
    return None


def keating_snaith_moment(N: int, beta: Number) -> Union[Fraction, float]:
    """E|P_N(A,θ)|^{2β} = ∏_{j=1}^{N} Γ(j)Γ(j+2β)/Γ(j+β)²."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if 2 * beta <= -1:
        raise ValueError(f"beta must satisfy 2*beta > -1, got {beta}")
    if _is_integral(beta) and beta >= 0:
        b = int(beta)
        value = Fraction(1)
        for j in range(N):
            value *= Fraction(math.factorial(j) * math.factorial(j + 2 * b), math.factorial(j + b) ** 2)
        return value
    j = np.arange(1, N + 1, dtype=float)
    log_value = np.sum(special.gammaln(j) + special.gammaln(j + 2 * beta) - 2 * special.gammaln(j + beta))
    return float(np.exp(log_value))


def barnes_g(z: Number) -> Union[Fraction, float]:
    """Barnes G-function; exact superfactorial at positive integers."""
    if _is_integral(z) and z >= 1:
        value = 1
        for j in range(int(z) - 1):
            value *= math.factorial(j)
        return Fraction(value)
    return float(mpmath.barnesg(float(z)))


def log_barnes_g(z: float) -> float:
    return float(mpmath.log(mpmath.barnesg(float(z))))


def _double_factorial_product(upper: int) -> int:
    product = 1
    for j in range(1, upper + 1):
        product *= int(special.factorial2(2 * j - 1, exact=True))
    return product


def symmetry_coefficient(group: Group, beta: Number) -> Union[Fraction, float]:
    """Leading-order moment coefficient c_G(β) for U(N), Sp(2N) and SO(2N)."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if group is Group.UNITARY:
        if _is_integral(beta):
            b = int(beta)
            return barnes_g(1 + b) ** 2 / barnes_g(1 + 2 * b)
        return math.exp(2 * log_barnes_g(1 + beta) - log_barnes_g(1 + 2 * beta))
    if group in (Group.SYMPLECTIC, Group.SPECIAL_ORTHOGONAL_EVEN):
        if not _is_integral(2 * beta):
            raise ValueError(f"{group.value} coefficient needs 2*beta to be a positive integer, got beta={beta}")
        two_beta = int(round(2 * beta))
        if group is Group.SYMPLECTIC:
            return Fraction(1, _double_factorial_product(two_beta))
        return Fraction(2 ** two_beta, _double_factorial_product(two_beta - 1))
    raise ValueError(f"No symmetry coefficient for group {group.value}")


def selberg_integral(a: float, b: float, alpha: float, beta: float, gamma: float, n: int) -> float:
    """Selberg's integral J(a, b, α, β, γ, n) in closed form."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    checks = [
        (a > 0, "a > 0"),
        (b > 0, "b > 0"),
        (alpha > 0, "alpha > 0"),
        (beta > 0, "beta > 0"),
        (alpha + beta > 1, "alpha + beta > 1"),
    ]
    if n > 1:
        checks.append((gamma > -1.0 / n, "gamma > -1/n"))
        upper = min(alpha / (n - 1), beta / (n - 1), (alpha + beta + 1) / (2 * (n - 1)))
        checks.append((gamma < upper, "gamma < min(alpha/(n-1), beta/(n-1), (alpha+beta+1)/(2(n-1)))"))
    for ok, inequality in checks:
        if not ok:
            raise ValueError(f"Selberg integral constraint violated: {inequality}")

    gamma = gamma if n > 1 else 0.0
    exponent = (alpha + beta) * n - gamma * n * (n - 1) - n
    value = (2 * math.pi) ** n / (a + b) ** exponent
    for j in range(n):
        value *= special.gamma(1 + gamma + j * gamma) * special.gamma(alpha + beta - (n - 1 + j) * gamma - 1)
        value /= special.gamma(1 + gamma) * special.gamma(alpha - j * gamma) * special.gamma(beta - j * gamma)
    return float(value)


def log_gumbel_sum_density(y):
    """log p(y) for the density of a sum of two independent standard Gumbels."""
    y = np.asarray(y, dtype=float)
    z = 2.0 * np.exp(-0.5 * y)
    # K0(z) = k0e(z) e^{-z} keeps the left tail finite in log space
    return np.log(2.0) - y - z + np.log(special.k0e(z))


def gumbel_sum_density(y):
    """p(y) = 2 e^{-y} K0(2 e^{-y/2})."""
    value = np.exp(log_gumbel_sum_density(y))
    return float(value) if np.ndim(value) == 0 else value


def fyodorov_bouchaud_moment(k: float, beta: float) -> float:
    """Γ(1 - kβ²)/Γ(1 - β²)^k, defined for kβ² < 1."""
    if k * beta ** 2 >= 1:
        raise ValueError(f"Moment undefined for k*beta^2 >= 1 (got {k * beta ** 2})")
    return float(special.gamma(1 - k * beta ** 2) / special.gamma(1 - beta ** 2) ** k)


def critical_coefficient(k: float) -> float:
    """Leading coefficient of MoM(k, 1/√k) ~ C · N log N."""
    if k <= 1:
        raise ValueError(f"Critical coefficient needs k > 1, got {k}")
    c_u = symmetry_coefficient(Group.UNITARY, 1.0 / math.sqrt(k))
    return float((k - 1) / special.gamma(1 - 1.0 / k) ** k * float(c_u) ** k)


def classify_regime(k: Number, beta: Number) -> Regime:
    """Compare k·β² with 1, exactly when both parameters are exact."""
    exact_k, exact_beta = _as_exact(k), _as_exact(beta)
    if exact_k is not None and exact_beta is not None:
        product = exact_k * exact_beta ** 2
        if product == 1:
            return Regime.CRITICAL
        if isinstance(k, float) or isinstance(beta, float):
            # floats such as 1/sqrt(3) land a few ulps away from the line
            if math.isclose(float(product), 1.0, rel_tol=1e-12):
                return Regime.CRITICAL
        return Regime.SUBCRITICAL if product < 1 else Regime.SUPERCRITICAL
    product = float(k) * float(beta) ** 2
    if math.isclose(product, 1.0, rel_tol=1e-12):
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if product < 1 else Regime.SUPERCRITICAL


def mom_prediction(group: Group, k: Number, beta: Number, N: Optional[int] = None) -> MomPrediction:
    """Regime, growth exponent and (when known) coefficient of MoM_G(k, β)."""
    if k <= 0 or beta <= 0:
        raise ValueError(f"k and beta must be positive, got k={k}, beta={beta}")
    regime = classify_regime(k, beta)
    kf, bf = float(k), float(beta)

    if group in (Group.SYMPLECTIC, Group.SPECIAL_ORTHOGONAL_EVEN):
        if not (_is_integral(k) and _is_integral(beta)):
            raise ValueError(f"{group.value} exponents are only stated for integer k and beta")
        if group is Group.SYMPLECTIC:
            exponent = kf * bf * (2 * kf * bf + 1) - kf
        else:
            exponent = kf * bf * (2 * kf * bf - 1) - kf
        return MomPrediction(regime=regime, exponent=exponent)

    if group is not Group.UNITARY:
        raise ValueError(f"No moments-of-moments prediction for group {group.value}")

    if kf == 1.0:
        return MomPrediction(regime=regime, exponent=bf ** 2,
                             coefficient=float(symmetry_coefficient(Group.UNITARY, beta)))
    if regime is Regime.SUBCRITICAL:
        coefficient = None
        if bf ** 2 < 1:
            c_u = float(symmetry_coefficient(Group.UNITARY, beta))
            coefficient = c_u ** kf * fyodorov_bouchaud_moment(kf, bf)
        return MomPrediction(regime=regime, exponent=kf * bf ** 2, coefficient=coefficient)
    if regime is Regime.CRITICAL:
        conjectural = not _is_integral(k)
        if conjectural:
            logger.warning(f"Critical coefficient at non-integer k={k} is conjectural")
        return MomPrediction(regime=regime, exponent=1.0, coefficient=critical_coefficient(kf),
                             modulating_factor="log N", conjectural=conjectural)
    return MomPrediction(regime=regime, exponent=kf ** 2 * bf ** 2 - kf + 1)


def fahs_exponent(thetas: Sequence[float], beta: float, N: int) -> float:
    """kβ² log N - 2β² Σ_{i<j} log(|sin((θ_i-θ_j)/2)| + 1/N), the O(1)-exact log D_N."""
    thetas = np.asarray(thetas, dtype=float)
    k = thetas.size
    value = k * beta ** 2 * math.log(N)
    for i in range(k):
        for j in range(i + 1, k):
            value -= 2 * beta ** 2 * math.log(abs(math.sin((thetas[i] - thetas[j]) / 2)) + 1.0 / N)
    return value


def zeta_arithmetic_factor(beta: float, p_max: int) -> float:
    """Euler product a_ζ(β) truncated to primes p <= p_max."""
    from .number_models import prime_sieve

    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if p_max < 2:
        raise ValueError(f"p_max must be >= 2, got {p_max}")
    primes = prime_sieve(p_max).as_array().astype(float)
    x = 1.0 / primes
    term = np.ones_like(x)
    total = np.ones_like(x)
    m = 0
    while True:
        term = term * ((beta + m) / (m + 1)) ** 2 * x
        total += term
        m += 1
        # term ratios move monotonically towards x <= 1/2
        tail_ratio = np.maximum(((beta + m) / (m + 1)) ** 2 * x, x)
        if np.all(tail_ratio < 1):
            tail = term * tail_ratio / (1 - tail_ratio)
            if np.all(tail < ARITHMETIC_TAIL_TOLERANCE * total):
                break
        if m > 10_000:
            raise RuntimeError("Euler factor series failed to converge")
    log_value = np.sum(beta ** 2 * np.log1p(-x) + np.log(total))
    return float(np.exp(log_value))


def log_correction_coefficients(sigma2: float) -> Tuple[float, float]:
    """Coefficients of log n in the maximum: (-3σ²/(2c), -σ²/(2c)), log-correlated then iid."""
    c = math.sqrt(2 * sigma2 * math.log(2))
    return -1.5 * sigma2 / c, -0.5 * sigma2 / c


def bramson_prediction(n: float, sigma2: float = 0.5 * math.log(2)) -> float:
    """c n - (3/2)(σ²/c) log n with c = √(2σ² log 2)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    c = math.sqrt(2 * sigma2 * math.log(2))
    return c * n + log_correction_coefficients(sigma2)[0] * math.log(n)


def iid_max_prediction(n: float, sigma2: float = 0.5 * math.log(2)) -> float:
    """Companion of bramson_prediction for 2^n independent N(0, σ²n) values."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    c = math.sqrt(2 * sigma2 * math.log(2))
    return c * n + log_correction_coefficients(sigma2)[1] * math.log(n)


def freezing_free_energy(beta: float) -> float:
    """Limit of the normalized free energy: β + 1/β below β = 1, frozen at 2 above."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return beta + 1.0 / beta if beta <= 1 else 2.0


def log_modulus_cumulant(N: int, order: int) -> float:
    """order-th cumulant of log|P_N(A, θ)| for Haar A ∈ U(N).

    Differentiating log M_N(s/2) at s = 0 gives (1 - 2^{1-order}) Σ_{j<=N} ψ^{(order-1)}(j).
    """
    if order < 2:
        raise ValueError("Only cumulants of order >= 2 are non-trivial")
    j = np.arange(1, N + 1, dtype=float)
    return float((1 - 2.0 ** (1 - order)) * np.sum(special.polygamma(order - 1, j)))


def log_argument_cumulant(N: int, order: int) -> float:
    """order-th cumulant of Im log P_N(A, θ); odd orders vanish."""
    if order < 2:
        raise ValueError("Only cumulants of order >= 2 are non-trivial")
    if order % 2:
        return 0.0
    j = np.arange(1, N + 1, dtype=float)
    # E exp(t Im log P) = ∏ Γ(j)²/(Γ(j + it/2)Γ(j - it/2)); derivatives at t = 0
    sign = (-1) ** (order // 2 + 1)
    return float(sign * 2.0 ** (1 - order) * np.sum(special.polygamma(order - 1, j)))
