"""Exception hierarchy shared by the library and the command line."""


class MimocellError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MimocellError, ValueError):
    """An argument lies outside the domain of a formula."""


class DivergenceError(DomainError):
    """The requested integral does not converge for these parameters."""


class ConvergenceError(MimocellError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions.

    The best estimate reached so far is kept on ``estimate`` together with
    the error bound that was still outstanding.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConfigError(MimocellError, ValueError):
    """Invalid or inconsistent configuration."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class EmptySupportError(MimocellError, ValueError):
    """A point set required to be non-empty was empty."""


class NotApplicableError(MimocellError, ValueError):
    """The requested comparison does not apply in this density regime."""
