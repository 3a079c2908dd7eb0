"""Exception hierarchy shared by every module."""

from __future__ import annotations


class QHAError(Exception):
    """Base class for all library errors."""


class ParameterError(QHAError, ValueError):
    """Invalid model or call parameters."""


class PoleError(QHAError, ValueError):
    """Evaluation at a pole of the gamma function."""


class NonIntegrableError(QHAError, ValueError):
    """An integral was requested whose integrand is not integrable."""


class ConvergenceError(QHAError, ArithmeticError):
    """A series or quadrature did not reach its tolerance.

    ``estimate`` and ``error`` hold the best value obtained and its error bound.
    """

    def __init__(self, message: str, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ToleranceError(ConvergenceError):
    """Adaptive quadrature ran out of subdivisions."""


class TailError(ConvergenceError):
    """A half-line integrand does not decay fast enough to truncate."""


class DegenerateError(QHAError, ArithmeticError):
    """A normalising quantity vanished or left the representable range."""


class CalibrationError(QHAError):
    """Calibration or validation of the Plancherel rule failed."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class TruncationWarning(UserWarning):
    """A truncated sum or quadrature has a tail above tolerance."""
