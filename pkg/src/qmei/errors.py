"""Exception hierarchy shared by all modules.

Exit-code contract used by the CLI: 1 for parse/validation failures,
2 for infeasible targets, 3 for solver non-convergence or conditioning
failures.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(ToolkitError):
    """Input violates a documented precondition or invariant."""

    exit_code = 1


class DimensionMismatchError(ValidationError):
    """Operands have incompatible dimensions."""


class CapacityError(ValidationError):
    """A requested tensor power exceeds the configured dimension budget."""


class DomainError(ValidationError):
    """A scalar function was applied outside its domain."""


class SupportError(ValidationError):
    """A support-inclusion precondition does not hold."""


class RationalApproximationError(ValidationError):
    """No common-denominator rational approximation met the tolerance."""


class FeasibilityError(ToolkitError):
    """Constraint targets lie outside the reachable spectral range."""

    exit_code = 2


class ConvergenceError(ToolkitError):
    """Iteration failed to converge; carries the residual history."""

    exit_code = 3

    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class ConditioningError(ConvergenceError):
    """A linear solve inside an iteration was too ill-conditioned."""
