"""Exception types shared across the package."""


class KSKError(Exception):
    """Base class for package errors."""


class DomainError(KSKError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(KSKError, ValueError):
    """Inconsistent numerical configuration (grid, budgets, options)."""


class UnsupportedError(KSKError, NotImplementedError):
    """The requested combination of options is not implemented."""


class AccuracyError(KSKError, ArithmeticError):
    """A numerical tolerance could not be met.

    The best available estimate is kept in ``estimate`` so callers can
    still inspect it.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
