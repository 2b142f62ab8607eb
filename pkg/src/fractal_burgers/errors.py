"""Exception types shared across the package."""


class FractalBurgersError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FractalBurgersError, ValueError):
    """A parameter lies outside the range where an operation is defined."""


class ShapeError(FractalBurgersError, ValueError):
    """A grid function has the wrong length."""


class DegenerateInputError(FractalBurgersError, ValueError):
    pass


class ConfigurationError(FractalBurgersError, ValueError):
    pass


class IntegrationError(FractalBurgersError, RuntimeError):
    """Time integration produced non-finite values."""

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class ConvergenceError(FractalBurgersError, RuntimeError):
    """An iteration stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PropertyViolation(FractalBurgersError, AssertionError):
    """A sampled quantity contradicts a property it is expected to satisfy."""


class BoundaryProximityError(FractalBurgersError, RuntimeError):
    """The tracked shift came too close to the edge of the computational domain."""


class FractalBurgersWarning(UserWarning):
    """Non-fatal numerical concern, e.g. a run drifting toward the domain edge."""
