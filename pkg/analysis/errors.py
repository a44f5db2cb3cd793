# errors.py


class PoUWError(Exception):
    """Base class for every error raised by the analysis and simulation code."""


class DomainError(PoUWError, ValueError):
    """An input lies outside the range a formula is defined on."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ApproximationError(DomainError):
    """An input is valid arithmetically but breaks a modeling approximation."""


class DegenerateError(PoUWError, ValueError):
    """A denominator vanishes or a sequence carries no information."""


class NotApplicableError(PoUWError, ValueError):
    """A result is requested outside the regime where it is known to hold."""
