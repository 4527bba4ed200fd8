"""Exceptions raised by the numerical modules."""

from typing import Optional, Sequence


class BudgetExceededError(ValueError):
    """A request exceeds a resource cap (depth, sieve limit, enumeration size)."""


class ConvergenceError(RuntimeError):
    """A quadrature or interpolation check failed to settle."""

    def __init__(self, message: str, estimates: Optional[Sequence] = None):
        super().__init__(message)
        self.estimates = list(estimates) if estimates is not None else []


class SingularMatrixError(ArithmeticError):
    """A Toeplitz matrix is numerically singular."""
