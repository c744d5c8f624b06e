"""
Error types raised by the toolkit.

Every domain failure derives from ToolkitError so the API and the CLI can
translate them in one place.
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit failures."""


class DomainError(ToolkitError, ValueError):
    """Argument outside the domain of an operation (negative time, t beyond horizon)."""


class ParameterError(ToolkitError, ValueError):
    """Invalid parameter or configuration value."""


class DistinctnessError(ToolkitError, ValueError):
    """Companion matrix eigenvalues are not pairwise distinct."""


class ModelViolationError(ToolkitError, ValueError):
    """Negative volatility met while simulating.

    V stays non-negative whenever a'e^{Bt}e >= 0 and a'e^{Bt}Y_0 >= -alpha0 for
    all t >= 0; reaching this error means the parameterization was never
    checked.
    """


class UndefinedValueError(ToolkitError, ValueError):
    """Statistic undefined for the input (zero denominator, zero variance)."""


class NumericalError(ToolkitError, ArithmeticError):
    """Numerical procedure did not meet its accuracy contract."""


class DataError(ToolkitError, ValueError):
    """Malformed input data; carries the offending row or line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def http_status(error: ToolkitError) -> int:
    """HTTP status used by the API for a toolkit failure"""
    return 422 if isinstance(error, DataError) else 400
