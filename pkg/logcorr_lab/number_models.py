"""Prime-based random models of ζ(1/2 + it) and the arithmetic behind them.

The randomized model replaces p^{-it} by independent unit-modulus (or complex
Gaussian) draws U_p, one per prime p <= T = e^{2^n}, and evaluates
X(h) = Σ_p Re(U_p p^{-ih})/√p on a grid of h in [0, 1).
"""

import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
import sympy
from scipy import special

from .errors import BudgetExceededError
from .estimates import Estimate

logger = logging.getLogger(__name__)

MAX_SIEVE_LIMIT = 10 ** 9
SIEVE_SEGMENT = 1 << 22

# T = e^{16} is the largest prime range the model sieves
MAX_MODEL_LEVEL = 4

# Oversampling of the natural h-scale 2^{-n}
DEFAULT_GRID_FACTOR = 8

# Primes per block when building cos/sin tables
PRIME_BLOCK = 1 << 14

MAX_ELLIPTIC_PRIME = 10 ** 6
MAX_ZETA_HEIGHT = 1e6
MAX_BERNOULLI_TERMS = 60


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to `limit`, ascending."""
    limit: int
    primes: np.ndarray

    def as_array(self) -> np.ndarray:
        return self.primes

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self) -> Iterator[int]:
        return (int(p) for p in self.primes)

    def __contains__(self, q: int) -> bool:
        i = int(np.searchsorted(self.primes, q))
        return i < self.primes.size and int(self.primes[i]) == q

    def count_up_to(self, x: float) -> int:
        """π(x) for x <= limit."""
        return int(np.searchsorted(self.primes, x, side="right"))


def _small_primes(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime)


@functools.lru_cache(maxsize=8)
def prime_sieve(limit: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes over [2, limit]."""
    if limit > MAX_SIEVE_LIMIT:
        raise BudgetExceededError(f"Sieve limit {limit} exceeds {MAX_SIEVE_LIMIT}")
    if limit < 2:
        return PrimeTable(limit=limit, primes=np.empty(0, dtype=np.int64))
    base = _small_primes(math.isqrt(limit))
    chunks = [base.astype(np.int64)]
    low = math.isqrt(limit) + 1
    while low <= limit:
        high = min(low + SIEVE_SEGMENT, limit + 1)
        mark = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            start = max(p * p, -(-low // p) * p)
            if start >= high:
                continue
            mark[start - low::p] = False
        chunks.append(np.flatnonzero(mark).astype(np.int64) + low)
        low = high
    primes = np.concatenate(chunks)
    primes.setflags(write=False)
    logger.debug(f"Sieved {primes.size} primes up to {limit}")
    return PrimeTable(limit=limit, primes=primes)


# --------------------------------------------------------------------------
# Randomized model of zeta on the critical line


class ModelVariant(Enum):
    STEINHAUS = "steinhaus"
    GAUSSIAN = "gaussian"

    @classmethod
    def from_string(cls, value: str) -> 'ModelVariant':
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"Unknown model variant: {value}. Valid: {[v.value for v in cls]}")


@dataclass(frozen=True)
class ModelConfig:
    """Level n with T = e^{2^n}; the h-grid defaults to 8·2^n points."""
    level: int
    variant: ModelVariant = ModelVariant.STEINHAUS
    grid_size: Optional[int] = None
    second_order: bool = False

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if self.level > MAX_MODEL_LEVEL:
            raise BudgetExceededError(f"level {self.level} exceeds the prime budget e^{{2^{MAX_MODEL_LEVEL}}}")
        if self.grid_size is None:
            object.__setattr__(self, "grid_size", DEFAULT_GRID_FACTOR << self.level)
        if self.grid_size < 1 << self.level:
            raise ValueError(f"grid_size must be >= 2^n = {1 << self.level}, got {self.grid_size}")

    @property
    def prime_limit(self) -> int:
        return int(math.floor(math.exp(2.0 ** self.level)))

    @property
    def log_log_T(self) -> float:
        return self.level * math.log(2)

    def h_grid(self) -> np.ndarray:
        return np.arange(self.grid_size) / self.grid_size


@dataclass(frozen=True)
class ModelMaxReport:
    level: int
    grid_size: int
    mean_max: Estimate
    leading: float
    corrected: float

    @property
    def ratio(self) -> float:
        return self.mean_max.mean / self.leading

    @property
    def corrected_ratio(self) -> float:
        return self.mean_max.mean / self.corrected

    def as_dict(self):
        return {"level": self.level, "grid_size": self.grid_size, "mean_max": self.mean_max.as_dict(),
                "leading": self.leading, "corrected": self.corrected, "ratio": self.ratio,
                "corrected_ratio": self.corrected_ratio}


def prime_draws(variant: ModelVariant, count: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, count) draws: uniform on the unit circle, or standard complex Gaussians with E|G|² = 1."""
    if variant is ModelVariant.STEINHAUS:
        return np.exp(2j * np.pi * rng.random((size, count)))
    return (rng.standard_normal((size, count)) + 1j * rng.standard_normal((size, count))) / math.sqrt(2)


def model_field_from_draws(primes: np.ndarray, draws: np.ndarray, h: np.ndarray,
                           second_order: bool = False) -> np.ndarray:
    """Σ_p Re(U_p p^{-ih})/√p [+ Re(U_p² p^{-2ih})/(2p)] for draws of shape (size, len(primes))."""
    draws = np.atleast_2d(draws)
    h = np.asarray(h, dtype=float)
    out = np.zeros((draws.shape[0], h.size))
    for start in range(0, primes.size, PRIME_BLOCK):
        p = primes[start:start + PRIME_BLOCK].astype(float)
        u = draws[:, start:start + PRIME_BLOCK]
        phase = np.outer(np.log(p), h)
        weight = 1.0 / np.sqrt(p)[:, None]
        # Re(U e^{-iφ}) = Re U cos φ + Im U sin φ
        out += u.real @ (np.cos(phase) * weight) + u.imag @ (np.sin(phase) * weight)
        if second_order:
            u2 = u * u
            weight2 = 1.0 / (2.0 * p)[:, None]
            out += u2.real @ (np.cos(2 * phase) * weight2) + u2.imag @ (np.sin(2 * phase) * weight2)
    return out


def model_field_batch(cfg: ModelConfig, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Independent model fields, shape (trials, grid_size); one draw per prime shared across h."""
    primes = prime_sieve(cfg.prime_limit).as_array()
    draws = prime_draws(cfg.variant, primes.size, trials, rng)
    return model_field_from_draws(primes, draws, cfg.h_grid(), cfg.second_order)


def model_field(cfg: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    return model_field_batch(cfg, 1, rng)[0]


def model_covariance(cfg: ModelConfig, h1: float, h2: float) -> float:
    """Exact Cov[X(h1), X(h2)] = ½ Σ cos((h1-h2) log p)/p plus the second-order term when enabled."""
    p = prime_sieve(cfg.prime_limit).as_array().astype(float)
    delta = (h1 - h2) * np.log(p)
    value = 0.5 * np.sum(np.cos(delta) / p)
    if cfg.second_order:
        # E|U²|² is 1 for Steinhaus draws and 2 for complex Gaussians
        fourth = 1.0 if cfg.variant is ModelVariant.STEINHAUS else 2.0
        value += fourth * np.sum(np.cos(2 * delta) / (8.0 * p * p))
    return float(value)


def model_variance(cfg: ModelConfig) -> float:
    return model_covariance(cfg, 0.0, 0.0)


def _increment_primes(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > MAX_MODEL_LEVEL:
        raise BudgetExceededError(f"level {m} exceeds the prime budget e^{{2^{MAX_MODEL_LEVEL}}}")
    primes = prime_sieve(int(math.floor(math.exp(2.0 ** m)))).as_array().astype(float)
    logs = np.log(primes)
    return primes[(logs > 2.0 ** (m - 1)) & (logs <= 2.0 ** m)]


def increment_covariance_sum(m: int) -> float:
    """Σ_{2^{m-1} < log p <= 2^m} 1/(2p), the variance of the m-th increment."""
    return float(np.sum(0.5 / _increment_primes(m)))


def increment_covariance(m: int, delta: float) -> float:
    """Cov(Y_m(h), Y_m(h + delta)) = ½ Σ_{2^{m-1} < log p <= 2^m} cos(delta log p)/p."""
    p = _increment_primes(m)
    return float(0.5 * np.sum(np.cos(delta * np.log(p)) / p))


def model_increments(cfg: ModelConfig, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Increments Y_1..Y_n over the h-grid, shape (trials, n, grid_size); they sum to X.

    Y_1 also carries the primes with log p <= 1.
    """
    primes = prime_sieve(cfg.prime_limit).as_array()
    draws = prime_draws(cfg.variant, primes.size, trials, rng)
    logs = np.log(primes.astype(float))
    h = cfg.h_grid()
    out = np.empty((trials, cfg.level, h.size))
    for m in range(1, cfg.level + 1):
        lower = -np.inf if m == 1 else 2.0 ** (m - 1)
        block = (logs > lower) & (logs <= 2.0 ** m)
        out[:, m - 1] = model_field_from_draws(primes[block], draws[:, block], h, cfg.second_order)
    return out


def model_max_report(cfg: ModelConfig, maxima: np.ndarray) -> ModelMaxReport:
    leading = cfg.log_log_T
    return ModelMaxReport(level=cfg.level, grid_size=cfg.grid_size, mean_max=Estimate.from_samples(maxima),
                          leading=leading, corrected=leading - 0.75 * math.log(leading))


def model_max_experiment(cfg: ModelConfig, trials: int, rng: np.random.Generator) -> ModelMaxReport:
    """Mean grid maximum against log log T and log log T - ¾ log log log T."""
    if trials < 200:
        raise ValueError(f"trials must be >= 200, got {trials}")
    report = model_max_report(cfg, model_field_batch(cfg, trials, rng).max(axis=1))
    logger.info(f"Model max at n={cfg.level}: {report.mean_max.mean:.4f} ({report.ratio:.3f} of n log 2)")
    return report


# --------------------------------------------------------------------------
# Arithmetic ingredients


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def kronecker_symbol(d: int, n: int) -> int:
    """(d/n) by multiplicativity over n = u·∏ p^e."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -1
    for p, e in sympy.factorint(n).items():
        if p == 2:
            if d % 2 == 0:
                return 0
            symbol = 1 if d % 8 in (1, 7) else -1
        else:
            symbol = _legendre(d, p)
            if symbol == 0:
                return 0
        result *= symbol ** e
    return result


def dirichlet_character_minus3(n: int) -> int:
    return kronecker_symbol(-3, n)


def _squarefree(m: int) -> bool:
    return all(e == 1 for p, e in sympy.factorint(m).items() if p != -1)


def is_fundamental_discriminant(d: int) -> bool:
    """d ≡ 1 (mod 4) squarefree, or d = 4m with m ≡ 2, 3 (mod 4) squarefree."""
    if d == 0:
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def fundamental_discriminants(lower: int, upper: int) -> List[int]:
    return [d for d in range(lower, upper + 1) if is_fundamental_discriminant(d)]


def elliptic_discriminant(a: int, b: int) -> int:
    return -16 * (4 * a ** 3 + 27 * b ** 2)


def elliptic_ap(a: int, b: int, p: int) -> int:
    """p + 1 - #{(x, y) mod p : y² = x³ + ax + b} for a prime of good reduction."""
    if p > MAX_ELLIPTIC_PRIME:
        raise BudgetExceededError(f"p = {p} exceeds the enumeration limit {MAX_ELLIPTIC_PRIME}")
    if not sympy.isprime(p):
        raise ValueError(f"p must be prime, got {p}")
    delta = elliptic_discriminant(a, b)
    if delta == 0:
        raise ValueError(f"Singular curve y^2 = x^3 + {a}x + {b}: discriminant is 0")
    if delta % p == 0:
        raise ValueError(f"Bad prime {p} divides the discriminant {delta}")
    x = np.arange(p, dtype=np.int64)
    rhs = (((x * x) % p * x) % p + (a % p) * x + (b % p)) % p
    square_roots = np.bincount((x * x) % p, minlength=p)
    affine = int(square_roots[rhs].sum())
    return p + 1 - affine


# --------------------------------------------------------------------------
# Zeta at desk scale


def zeta(s: complex, tolerance: float = 1e-12) -> complex:
    """ζ(s) by Euler-Maclaurin summation with Bernoulli corrections added until they drop below tolerance."""
    s = complex(s)
    if s == 1:
        raise ValueError("zeta has a pole at s = 1")
    if abs(s.imag) > MAX_ZETA_HEIGHT:
        raise BudgetExceededError(f"|t| = {abs(s.imag)} exceeds {MAX_ZETA_HEIGHT}")
    cutoff = max(20, int(math.ceil(abs(s))) + 10)
    n = np.arange(1, cutoff, dtype=float)
    total = np.sum(np.exp(-s * np.log(n)))
    N = float(cutoff)
    N_minus_s = np.exp(-s * math.log(N))
    total += N * N_minus_s / (s - 1) + 0.5 * N_minus_s
    bernoulli = special.bernoulli(2 * MAX_BERNOULLI_TERMS)
    # rising factorial s(s+1)...(s+2k-2) and N^{-s-2k+1}
    rising = s
    power = N_minus_s / N
    for k in range(1, MAX_BERNOULLI_TERMS + 1):
        term = bernoulli[2 * k] / math.factorial(2 * k) * rising * power
        total += term
        if abs(term) < tolerance * max(1.0, abs(total)):
            return complex(total)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= N * N
    logger.warning(f"Euler-Maclaurin tail at s={s} did not reach {tolerance}")
    return complex(total)


def zeta_eval(t: float, tolerance: float = 1e-12) -> complex:
    """ζ(1/2 + it)."""
    return zeta(complex(0.5, t), tolerance)


def zeta_interval_max(t0: float, window: float, grid: Optional[int] = None) -> Tuple[float, float]:
    """(h*, max log|ζ(1/2 + i(t0 + h))|) over an h-grid on [0, window]."""
    if t0 <= math.e:
        raise ValueError(f"t0 must exceed e, got {t0}")
    minimum = int(math.ceil(window * math.log(t0)))
    grid = grid if grid is not None else DEFAULT_GRID_FACTOR * minimum
    if grid < minimum:
        raise ValueError(f"grid must have >= window*log(t0) = {minimum} points, got {grid}")
    hs = np.linspace(0.0, window, grid)
    values = np.array([math.log(abs(zeta_eval(t0 + h))) for h in hs])
    i = int(np.argmax(values))
    return float(hs[i]), float(values[i])
