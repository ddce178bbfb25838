"""Typed errors shared across the package."""


class MetriplecticError(Exception):
    """Base class for every error raised by this package."""


class ArityMismatch(MetriplecticError):
    """An observable was evaluated on a state class it does not read."""


class NonFiniteGradient(MetriplecticError):
    """A gradient entry came out NaN or infinite."""


class DegenerateK(MetriplecticError):
    """The dissipative work K is too close to zero for the 1/(T K) bracket."""


class NonpositiveTemperature(MetriplecticError):
    """A temperature that must be positive was not."""


class SpecError(MetriplecticError):
    """A system specification violates its registration preconditions."""


class SingularFrictionMatrix(MetriplecticError):
    """The friction matrix is numerically singular and cannot be inverted."""


class LegendreInversionFailure(MetriplecticError):
    """Newton iteration for the velocity did not meet tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainViolation(MetriplecticError):
    """The trajectory left the admissible domain of its system."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class ConfigError(MetriplecticError):
    """A scenario or CLI configuration is malformed or inconsistent."""


class UnsupportedSuite(MetriplecticError):
    """The requested verification suite does not apply to the given system."""
