"""Branching random walk on the binary tree, the random energy model, and
their moments of moments.

Leaves of a depth-n tree carry X_n(l) = Σ_m Y_m(l), one Gaussian increment of
variance σ² per edge, so Cov(X_n(l), X_n(l')) = σ² lca(l, l'). With
σ² = ½ log 2 the exact moments of moments reduce to weighted counts of the
lca-sum S over k-tuples of leaves.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy
from scipy import special, stats

from .closed_forms import Regime, classify_regime, log_correction_coefficients
from .errors import BudgetExceededError, ConvergenceError
from .estimates import Estimate, fit_log_coefficient, fit_slope_with_log
from .mom import MomPolynomial

logger = logging.getLogger(__name__)

DEFAULT_SIGMA2 = 0.5 * math.log(2)

# 2^26 leaves is the largest tree held in memory
MAX_TREE_DEPTH = 26

# Leaves generated per simulation batch
BATCH_LEAVES = 1 << 22

BRUTEFORCE_MAX_EXPONENT = 24
BRUTEFORCE_CHUNK = 1 << 20
RECURSION_MAX_K = 8
RECURSION_MAX_DEPTH = 64

# β² = p/r is handled exactly in Z[2^{1/r}] up to this r
MAX_RADICAL_ROOT = 64

FLOAT_DPS = 40

BetaLike = Union[int, float, Fraction, sympy.Basic]


@dataclass(frozen=True)
class TreeConfig:
    """Depth and increment variance of the binary branching random walk."""
    depth: int
    sigma2: float = DEFAULT_SIGMA2
    max_depth: int = MAX_TREE_DEPTH

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        if self.depth > self.max_depth:
            raise BudgetExceededError(f"depth {self.depth} exceeds the leaf budget 2^{self.max_depth}")

    @property
    def leaves(self) -> int:
        return 1 << self.depth

    @property
    def leading_slope(self) -> float:
        """c = √(2σ² log 2), the speed of the maximum."""
        return math.sqrt(2 * self.sigma2 * math.log(2))


@dataclass(frozen=True)
class LeafField:
    values: np.ndarray

    def __post_init__(self):
        size = len(self.values)
        if size < 2 or size & (size - 1):
            raise ValueError(f"A leaf field needs 2^n values, got {size}")

    @property
    def depth(self) -> int:
        return len(self.values).bit_length() - 1

    def max(self) -> float:
        return float(np.max(self.values))


@dataclass(frozen=True)
class MaxRegression:
    """Mean maxima over a depth range with the fitted log n correction."""
    model: str
    sigma2: float
    depths: Tuple[int, ...]
    mean_maxima: Tuple[Estimate, ...]
    slope: float
    log_coefficient: float
    intercept: float
    predicted_log_coefficient: float
    fitted_slope: float

    def as_dict(self) -> Dict:
        return {
            "model": self.model,
            "sigma2": self.sigma2,
            "depths": list(self.depths),
            "mean_maxima": [e.as_dict() for e in self.mean_maxima],
            "slope": self.slope,
            "log_coefficient": self.log_coefficient,
            "intercept": self.intercept,
            "predicted_log_coefficient": self.predicted_log_coefficient,
            "fitted_slope": self.fitted_slope,
        }


# --------------------------------------------------------------------------
# Tree geometry and simulation


def lca_level(l: int, l_prime: int, n: int) -> int:
    """Depth of the last common ancestor of leaves l and l' (n iff l == l')."""
    size = 1 << n
    if not (0 <= l < size and 0 <= l_prime < size):
        raise ValueError(f"Leaf indices must lie in [0, {size}), got {l} and {l_prime}")
    return n - (l ^ l_prime).bit_length()


def lca_levels(leaves: np.ndarray, other: np.ndarray, n: int) -> np.ndarray:
    """Vectorized lca_level for leaf indices below 2^53."""
    xor = np.bitwise_xor(leaves, other).astype(float)
    return n - np.frexp(xor)[1]


def simulate_brw_batch(cfg: TreeConfig, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` independent leaf fields, shape (size, 2^n), leaves left to right."""
    sigma = math.sqrt(cfg.sigma2)
    values = np.zeros((size, 1))
    for level in range(1, cfg.depth + 1):
        values = np.repeat(values, 2, axis=1)
        values += sigma * rng.standard_normal((size, 1 << level))
    return values


def simulate_brw(cfg: TreeConfig, rng: np.random.Generator) -> LeafField:
    return LeafField(simulate_brw_batch(cfg, 1, rng)[0])


def _batch_size(cfg: TreeConfig) -> int:
    return max(1, BATCH_LEAVES // cfg.leaves)


def brw_max_samples(cfg: TreeConfig, trials: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(trials)
    step = _batch_size(cfg)
    for start in range(0, trials, step):
        size = min(step, trials - start)
        out[start:start + size] = simulate_brw_batch(cfg, size, rng).max(axis=1)
    return out


def rem_max_sample(n: int, trials: int, rng: np.random.Generator, sigma2: float = DEFAULT_SIGMA2) -> np.ndarray:
    """Exact draws of the max of 2^n independent N(0, σ²n) values by inverting Φ^{2^n}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = rng.random(trials)
    tail = -np.expm1(np.log(u) / float(1 << n))
    return math.sqrt(sigma2 * n) * stats.norm.isf(tail)


def rem_partition_mean(n: int, beta: float, trials: int, rng: np.random.Generator,
                       sigma2: float = 1.0) -> Estimate:
    """Estimate of E[2^{-n} Σ_l e^{-βX_l}] for iid X_l ~ N(0, σ²n); the exact value is e^{β²σ²n/2}."""
    if n > MAX_TREE_DEPTH:
        raise BudgetExceededError(f"n = {n} exceeds the leaf budget 2^{MAX_TREE_DEPTH}")
    size = 1 << n
    scale = math.sqrt(sigma2 * n)
    samples = np.empty(trials)
    step = max(1, BATCH_LEAVES // size)
    for start in range(0, trials, step):
        rows = min(step, trials - start)
        x = scale * rng.standard_normal((rows, size))
        samples[start:start + rows] = np.exp(-beta * x).mean(axis=1)
    return Estimate.from_samples(samples)


# --------------------------------------------------------------------------
# Partition function and freezing


def log_partition_function(field: LeafField, beta: float) -> float:
    values = np.asarray(field.values, dtype=float)
    return float(special.logsumexp(2.0 * beta * values) - field.depth * math.log(2))


def partition_function(field: LeafField, beta: float) -> float:
    """Z = 2^{-n} Σ_l e^{2βX_n(l)}."""
    return math.exp(log_partition_function(field, beta))


def free_energy_samples(cfg: TreeConfig, betas: Sequence[float], trials: int,
                        rng: np.random.Generator) -> np.ndarray:
    """log(2^n Z_β) / (β log 2^n) per trial and β, shape (trials, len(betas))."""
    betas = np.asarray(betas, dtype=float)
    if np.any(betas <= 0):
        raise ValueError("Free energies are normalized by β; all betas must be > 0")
    norm = betas * cfg.depth * math.log(2)
    out = np.empty((trials, betas.size))
    step = _batch_size(cfg)
    for start in range(0, trials, step):
        size = min(step, trials - start)
        fields = simulate_brw_batch(cfg, size, rng)
        for i, beta in enumerate(betas):
            out[start:start + size, i] = special.logsumexp(2.0 * beta * fields, axis=1) / norm[i]
    return out


def free_energy_curve(cfg: TreeConfig, betas: Sequence[float], trials: int,
                      rng: np.random.Generator) -> List[Estimate]:
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    samples = free_energy_samples(cfg, betas, trials, rng)
    return [Estimate.from_samples(samples[:, i]) for i in range(samples.shape[1])]


# --------------------------------------------------------------------------
# Maxima


def max_regression(model: str, depths: Sequence[int], estimates: Sequence[Estimate],
                   sigma2: float = DEFAULT_SIGMA2) -> MaxRegression:
    """Fit mean max - c n = b log n + a; the predicted b is -3σ²/(2c) for "brw" and -σ²/(2c) for "rem"."""
    if model not in ("brw", "rem"):
        raise ValueError(f"Unknown max model: {model}")
    predicted = log_correction_coefficients(sigma2)[0 if model == "brw" else 1]
    c = math.sqrt(2 * sigma2 * math.log(2))
    means = [e.mean for e in estimates]
    b, a = fit_log_coefficient(depths, means, c)
    fitted_slope, _ = fit_slope_with_log(depths, means, predicted)
    logger.info(f"{model} max: log n coefficient {b:.4f} (predicted {predicted:.4f}), slope {fitted_slope:.4f}")
    return MaxRegression(model=model, sigma2=sigma2, depths=tuple(depths), mean_maxima=tuple(estimates),
                         slope=c, log_coefficient=b, intercept=a, predicted_log_coefficient=predicted,
                         fitted_slope=fitted_slope)


def _check_depths(depths: Sequence[int], trials: int, min_trials: int) -> None:
    if trials < min_trials:
        raise ValueError(f"trials must be >= {min_trials}, got {trials}")
    if len(set(depths)) < 3 or min(depths) < 2:
        raise ValueError(f"Need at least three distinct depths >= 2, got {list(depths)}")


def brw_max_experiment(depths: Sequence[int], trials: int, rng: np.random.Generator,
                       sigma2: float = DEFAULT_SIGMA2, min_trials: int = 500) -> MaxRegression:
    """Mean BRW maximum per depth, regressed as mean - c n = b log n + a."""
    _check_depths(depths, trials, min_trials)
    estimates = []
    for n in depths:
        cfg = TreeConfig(depth=n, sigma2=sigma2)
        estimates.append(Estimate.from_samples(brw_max_samples(cfg, trials, rng)))
        logger.debug(f"BRW depth {n}: mean max {estimates[-1].mean:.4f}")
    return max_regression("brw", depths, estimates, sigma2)


def rem_max_experiment(depths: Sequence[int], trials: int, rng: np.random.Generator,
                       sigma2: float = DEFAULT_SIGMA2, min_trials: int = 500) -> MaxRegression:
    """Independent baseline: same regression for 2^n iid N(0, σ²n) values."""
    _check_depths(depths, trials, min_trials)
    estimates = [Estimate.from_samples(rem_max_sample(n, trials, rng, sigma2)) for n in depths]
    return max_regression("rem", depths, estimates, sigma2)


# --------------------------------------------------------------------------
# Exact moments of moments


@dataclass(frozen=True)
class RadicalTwo:
    """Σ_i c_i 2^{i/r} with integer c_i; r = len(coeffs)."""
    coeffs: Tuple[int, ...]

    @classmethod
    def power(cls, numerator: int, root: int) -> 'RadicalTwo':
        """2^{numerator/root} for numerator >= 0."""
        whole, rest = divmod(numerator, root)
        coeffs = [0] * root
        coeffs[rest] = 1 << whole
        return cls(tuple(coeffs))

    @property
    def root(self) -> int:
        return len(self.coeffs)

    def __add__(self, other):
        if isinstance(other, int):
            return RadicalTwo((self.coeffs[0] + other,) + self.coeffs[1:])
        return RadicalTwo(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, int):
            return RadicalTwo(tuple(other * c for c in self.coeffs))
        r = self.root
        out = [0] * (2 * r - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        # 2^{(r+i)/r} = 2 · 2^{i/r}
        for i in range(r, 2 * r - 1):
            out[i - r] += 2 * out[i]
        return RadicalTwo(tuple(out[:r]))

    __rmul__ = __mul__

    def as_sympy(self) -> sympy.Expr:
        r = self.root
        return sympy.Add(*[sympy.Integer(c) * sympy.Integer(2) ** sympy.Rational(i, r)
                           for i, c in enumerate(self.coeffs) if c])

    def __float__(self) -> float:
        r = self.root
        return float(mpmath.fsum(c * mpmath.power(2, mpmath.mpf(i) / r) for i, c in enumerate(self.coeffs)))


def beta_squared(beta: BetaLike) -> Union[Fraction, mpmath.mpf]:
    """β² as a Fraction when it is rational with a small denominator, else as an mpf."""
    if isinstance(beta, (int, Fraction)):
        return Fraction(beta) ** 2
    if isinstance(beta, sympy.Basic):
        square = sympy.nsimplify(sympy.simplify(beta ** 2))
        if square.is_Rational and square.q <= MAX_RADICAL_ROOT:
            return Fraction(int(square.p), int(square.q))
        with mpmath.workdps(FLOAT_DPS):
            return mpmath.mpf(str(sympy.N(beta ** 2, FLOAT_DPS)))
    square = Fraction(float(beta)) ** 2
    if square.denominator <= MAX_RADICAL_ROOT:
        return square
    with mpmath.workdps(FLOAT_DPS):
        return mpmath.mpf(float(beta)) ** 2


def _weights(b2: Union[Fraction, mpmath.mpf]) -> Tuple[Callable[[int], object], Callable[[object, int], object]]:
    """(s -> 2^{β² s}, (total, kn) -> 2^{-kn} total) in the arithmetic matching β²."""
    if isinstance(b2, Fraction) and b2.denominator == 1:
        p = int(b2)
        return (lambda s: 1 << (p * s)), (lambda total, kn: Fraction(total, 1 << kn))
    if isinstance(b2, Fraction):
        p, r = b2.numerator, b2.denominator
        return ((lambda s: RadicalTwo.power(p * s, r)),
                (lambda total, kn: sympy.Rational(1, 1 << kn) * (total.as_sympy() if isinstance(total, RadicalTwo)
                                                                 else sympy.Integer(total))))

    def weight(s):
        with mpmath.workdps(FLOAT_DPS):
            return mpmath.power(2, b2 * s)

    def finish(total, kn):
        with mpmath.workdps(FLOAT_DPS):
            return total / mpmath.power(2, kn)

    return weight, finish


def lca_sum_distribution(k: int, n: int) -> Dict[int, int]:
    """Counts of S = Σ_{i,j} lca(l_i, l_j) over all 2^{kn} k-tuples of leaves, by enumeration."""
    if k < 1 or n < 1:
        raise ValueError(f"k and n must be >= 1, got k={k}, n={n}")
    if k * n > BRUTEFORCE_MAX_EXPONENT:
        raise BudgetExceededError(f"k*n = {k * n} exceeds the enumeration limit {BRUTEFORCE_MAX_EXPONENT}")
    mask = (1 << n) - 1
    total = 1 << (k * n)
    counts = np.zeros(k * k * n + 1, dtype=np.int64)
    for start in range(0, total, BRUTEFORCE_CHUNK):
        t = np.arange(start, min(start + BRUTEFORCE_CHUNK, total), dtype=np.int64)
        leaves = [(t >> (n * i)) & mask for i in range(k)]
        s = np.full(t.shape, k * n, dtype=np.int64)
        for i in range(k):
            for j in range(i + 1, k):
                s += 2 * lca_levels(leaves[i], leaves[j], n).astype(np.int64)
        counts += np.bincount(s, minlength=counts.size)
    return {int(s): int(c) for s, c in enumerate(counts) if c}


def _recursion_totals(k: int, n: int, weight: Callable[[int], object]) -> object:
    """Σ over k-tuples of 2^{β² S}, splitting the tuple between the root's two subtrees."""
    weights = [weight(s) for s in range(k * k + 1)]
    binom = [[math.comb(j, i) for i in range(j + 1)] for j in range(k + 1)]
    level = [1] * (k + 1)
    for _ in range(n):
        nxt = [1]
        for j in range(1, k + 1):
            nxt.append(sum(binom[j][i] * weights[i * i + (j - i) ** 2] * level[i] * level[j - i]
                           for i in range(j + 1)))
        level = nxt
    return level[k]


def mom_branching_exact(k: int, beta: BetaLike, n: int, mode: str = "recursion"):
    """2^{-kn} Σ_{tuples} 2^{β² S} for the depth-n tree with σ² = ½ log 2.

    Returns a Fraction for integer β², an exact sympy value for other rational
    β², and an mpmath float otherwise.
    """
    if k < 1 or n < 1:
        raise ValueError(f"k and n must be >= 1, got k={k}, n={n}")
    b2 = beta_squared(beta)
    if b2 == 0:
        return Fraction(1)
    weight, finish = _weights(b2)
    if mode == "bruteforce":
        distribution = lca_sum_distribution(k, n)
        total = sum(count * weight(s) for s, count in sorted(distribution.items()))
    elif mode == "recursion":
        if k > RECURSION_MAX_K or n > RECURSION_MAX_DEPTH:
            raise BudgetExceededError(f"Recursion limited to k <= {RECURSION_MAX_K}, n <= {RECURSION_MAX_DEPTH}; "
                                      f"got k={k}, n={n}")
        total = _recursion_totals(k, n, weight)
    else:
        raise ValueError(f"Unknown mode: {mode}")
    return finish(total, k * n)


def mom_branching_polynomial(k: int, beta: int) -> MomPolynomial:
    """Exact polynomial in x = 2^n, interpolated at n = 0..degree and checked at two more depths."""
    if k < 1 or beta < 1:
        raise ValueError(f"k and beta must be positive integers, got k={k}, beta={beta}")
    degree = k ** 2 * beta ** 2 - k + 1
    weight, _ = _weights(Fraction(beta ** 2))

    def value(depth: int) -> Fraction:
        return Fraction(_recursion_totals(k, depth, weight), 1 << (k * depth))

    x = sympy.Symbol("x")
    points = [(1 << d, sympy.Rational(v.numerator, v.denominator))
              for d, v in ((d, value(d)) for d in range(degree + 1))]
    poly = sympy.Poly(sympy.expand(sympy.interpolate(points, x)), x)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    coeffs += [Fraction(0)] * (degree + 1 - len(coeffs))
    result = MomPolynomial(k=k, beta=beta, coeffs=tuple(coeffs), variable="x")
    for depth in (degree + 1, degree + 2):
        expected = value(depth)
        got = result.evaluate(1 << depth)
        if got != expected:
            raise ConvergenceError(f"Interpolated branching MoM({k},{beta}) gives {got} at n={depth}, "
                                   f"recursion gives {expected}", estimates=[got, expected])
    logger.info(f"Branching MoM({k},{beta}) polynomial of degree {degree} verified")
    return result


@dataclass(frozen=True)
class LeadingCoefficient:
    """mom_branching_exact(k, β, n) / (2^{exponent·n} [· n]) at one depth."""
    k: int
    beta: float
    depth: int
    regime: Regime
    exponent: float
    value: float
    log_moment_per_depth: float


def branching_leading_coefficient(k: int, beta: float, n: int) -> LeadingCoefficient:
    """Normalize the exact moment by its predicted growth; critical k β² = 1 also divides by n."""
    regime = classify_regime(k, beta)
    b2 = beta_squared(beta)
    exponent = float(k * b2) if regime is Regime.SUBCRITICAL else float(k * k * b2 - k + 1)
    weight, finish = _weights(b2 if not isinstance(b2, Fraction) else mpmath.mpf(b2.numerator) / b2.denominator)
    with mpmath.workdps(FLOAT_DPS):
        moment = finish(_recursion_totals(k, n, weight), k * n)
        scale = mpmath.power(2, mpmath.mpf(exponent) * n)
        if regime is Regime.CRITICAL:
            scale *= n
        value = float(moment / scale)
    return LeadingCoefficient(k=k, beta=float(beta), depth=n, regime=regime, exponent=exponent, value=value,
                              log_moment_per_depth=float(mpmath.log(moment)) / n)
