"""Exception types shared across the package."""


class LiesymError(Exception):
    """Base class for all package errors."""


class DomainError(LiesymError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(LiesymError, ValueError):
    """Arguments are well-typed but inconsistent (length mismatch, bad config)."""


class FlowError(LiesymError, ArithmeticError):
    """Numerical integration of a flow left the valid state space."""
