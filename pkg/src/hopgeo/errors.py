"""Exception hierarchy shared across the package."""


class HopgeoError(Exception):
    """Base class for all package errors."""


class DomainError(HopgeoError, ValueError):
    """Input lies outside the domain where a quantity is defined."""


class ConvergenceError(HopgeoError, RuntimeError):
    """An iterative solver failed to converge."""


class GeometryError(HopgeoError, ValueError):
    """Metric is degenerate or not positive definite at a point."""


class NumericalError(HopgeoError, ArithmeticError):
    """Non-finite values appeared in a stencil, quadrature or integration."""


class ModelError(HopgeoError, ValueError):
    """A model specification violates its structural requirements."""


class UnsupportedRouteError(HopgeoError, TypeError):
    """The requested computation route does not apply to the given inputs."""


class ConfigError(HopgeoError, ValueError):
    """Run configuration failed to parse or validate.

    ``line`` carries the 1-based line in the config text the problem is
    anchored to, when one can be located.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
