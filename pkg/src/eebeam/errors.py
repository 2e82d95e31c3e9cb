"""Exception types shared across the package."""


class EebeamError(Exception):
    """Base class for all package errors."""


class ValidationError(EebeamError):
    """Input violates a structural invariant (shape, Hermitian symmetry, range)."""


class SingularMatrixError(EebeamError):
    """Matrix is singular or indefinite where a positive-definite one is required."""


class DegenerateConfigError(EebeamError):
    """Configuration makes the problem ill-posed (e.g. zero power consumption)."""


class ConfigError(EebeamError):
    """Inconsistent configuration values."""


class NonConvergenceError(EebeamError):
    """An iterative search exhausted its iteration budget."""

    def __init__(self, message, bracket=None, trace=None):
        super().__init__(message)
        self.bracket = bracket
        self.trace = trace


class ProtocolError(EebeamError):
    """Coordination protocol violated its round structure."""
