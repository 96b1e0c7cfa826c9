"""
Exception hierarchy for the contagion toolkit.
"""

from typing import Optional


class ContagionError(Exception):
    """Base class for every error raised by this package."""


class ModelValidationError(ContagionError, ValueError):
    """Invalid model parameters or a malformed run configuration."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.column = column
        self.key = key
        self.detail = message
        location = []
        if line is not None:
            location.append(f"line {line}")
            if column is not None:
                location.append(f"column {column}")
        if key:
            location.append(f"key '{key}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DomainError(ContagionError, ValueError):
    """An argument lies outside the domain of a numeric operation."""


class NonStationaryError(ContagionError):
    """The spectral radius of the excitation matrix is not below one."""

    def __init__(self, radius: float, message: Optional[str] = None):
        self.radius = radius
        super().__init__(message or f"Model is not stationary: spectral radius {radius!r} >= 1")


class SingularSystemError(NonStationaryError):
    """The second-moment system has a vanishing determinant."""


class ConvergenceError(ContagionError):
    """A numeric procedure stopped before meeting its tolerance."""

    def __init__(self, message: str, gap: Optional[float] = None,
                 horizon: Optional[float] = None):
        self.gap = gap
        self.horizon = horizon
        super().__init__(message)
