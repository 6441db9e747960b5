"""Exception types shared across the package."""


class CarpetError(Exception):
    """Base class for all package errors."""


class DomainError(CarpetError, ValueError):
    """An argument or state violates a documented domain constraint."""


class ConfigError(CarpetError, ValueError):
    """A run configuration is malformed or violates an invariant."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NodeProximityError(CarpetError, RuntimeError):
    """Velocity requested where the density is below the node floor."""

    def __init__(self, message, positions=()):
        super().__init__(message)
        self.positions = tuple(positions)


class FitFailure(CarpetError, RuntimeError):
    """Curve fit did not converge; ``best`` holds the best candidate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
