"""Monte Carlo estimates and the scaling fits used by the experiments."""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""
    mean: float
    stderr: float
    n_samples: int

    @classmethod
    def from_samples(cls, samples) -> 'Estimate':
        values = np.asarray(samples, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("Cannot estimate from an empty sample")
        stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else float("inf")
        return cls(mean=float(values.mean()), stderr=stderr, n_samples=int(values.size))

    def agrees_with(self, target: float, n_stderr: float = 3.0, slack: float = 0.0) -> bool:
        """True when |mean - target| is within n_stderr standard errors (+ slack)."""
        return abs(self.mean - target) <= n_stderr * self.stderr + slack

    def as_dict(self):
        return {"mean": self.mean, "stderr": self.stderr, "n_samples": self.n_samples}


def objective_lin(x, a, b):
    return a * x + b


def objective_log(x, a, b, c):
    return a * x + b * np.log(x) + c


def objective_power_correction(log_x, exponent, intercept, correction, power=-1.0):
    return exponent * log_x + intercept + correction * np.exp(power * log_x)


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float], inverse_correction: bool = False,
                     correction_power: float = -1.0) -> float:
    """Slope of log y against log x, optionally with a b·x^correction_power term (b/x by default)."""
    log_x = np.log(np.asarray(xs, dtype=float))
    log_y = np.log(np.asarray(ys, dtype=float))
    if not inverse_correction:
        popt, _ = curve_fit(objective_lin, log_x, log_y)
        return float(popt[0])
    if correction_power >= 0:
        raise ValueError(f"correction_power must be negative, got {correction_power}")
    popt, _ = curve_fit(lambda lx, e, a, b: objective_power_correction(lx, e, a, b, correction_power),
                        log_x, log_y, p0=(1.0, 0.0, 0.0))
    return float(popt[0])


def fit_log_coefficient(ns: Sequence[float], ys: Sequence[float], slope: float) -> Tuple[float, float]:
    """Fit y - slope*n = b log n + a; returns (b, a)."""
    n = np.asarray(ns, dtype=float)
    residual = np.asarray(ys, dtype=float) - slope * n
    popt, _ = curve_fit(lambda x, b, a: b * np.log(x) + a, n, residual)
    return float(popt[0]), float(popt[1])


def fit_linear_log(ns: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, float]:
    """Fit y = a n + b log n + c; returns (a, b, c)."""
    popt, _ = curve_fit(objective_log, np.asarray(ns, dtype=float), np.asarray(ys, dtype=float))
    return float(popt[0]), float(popt[1]), float(popt[2])


def fit_slope_with_log(ns: Sequence[float], ys: Sequence[float], log_coefficient: float) -> Tuple[float, float]:
    """Fit y - log_coefficient*log n = a n + c with the log term held fixed; returns (a, c)."""
    n = np.asarray(ns, dtype=float)
    residual = np.asarray(ys, dtype=float) - log_coefficient * np.log(n)
    popt, _ = curve_fit(objective_lin, n, residual)
    return float(popt[0]), float(popt[1])


def fit_linear(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Least-squares y = a x + b; returns (a, b)."""
    popt, _ = curve_fit(objective_lin, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    return float(popt[0]), float(popt[1])
