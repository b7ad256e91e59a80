"""Exception hierarchy.

Validation errors (bad arguments, unreadable input) and numerical errors
(quadrature that does not converge, integrands that misbehave) are kept apart
because the CLI maps them to different exit statuses.
"""

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .quadrature import QuadResult


class WelfareLensError(Exception):
    """Base class for every error raised by welfarelens."""


class DomainError(WelfareLensError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class SampleError(WelfareLensError):
    """Raised when an income sample cannot be read or fails validation."""


class DistSpecError(WelfareLensError, ValueError):
    """Raised when a ``family:params`` distribution spec is invalid."""


class ConfigError(WelfareLensError):
    """Raised when a CLI flag or environment variable holds an unusable value."""


class NumericalError(WelfareLensError):
    """Base class for failures of the numerical machinery."""


class QuadratureError(NumericalError):
    """Raised when an integral does not converge within the evaluation budget.

    ``partial`` holds the best estimate reached before giving up.
    """

    def __init__(self, message: str, partial: QuadResult) -> None:
        super().__init__(message)
        self.partial = partial


class DivergentIntegralError(QuadratureError):
    """Raised when an improper integral grows without bound under refinement."""


class IntegrandError(NumericalError):
    """Raised when an integrand returns NaN or an infinity inside the interval."""

    def __init__(self, message: str, p: float) -> None:
        super().__init__(message)
        self.p = p


class DegenerateTailError(NumericalError):
    """Raised when the upper group above rank p carries no income."""
