"""Exception types shared across the package."""


class PolaronError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PolaronError, ValueError):
    """Input outside the physical domain (e.g. negative frequency)."""


class ParameterError(PolaronError, ValueError):
    """Invalid construction parameter (e.g. Lambda <= 1)."""


class DimensionError(PolaronError, ValueError):
    """Mismatched array dimensions between state and bath."""


class DegenerateStateError(PolaronError):
    """Variational state with vanishing norm; observables undefined."""


class ConvergenceError(PolaronError):
    """Iterative procedure failed to converge.

    Carries the last iterate so callers can inspect how far it got.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class PhysicsDomainError(PolaronError):
    """Request outside the physically supported regime (CLI exit code 3)."""


class ConfigError(PolaronError):
    """Malformed run configuration (CLI exit code 2)."""
