"""Exception hierarchy shared by the numerical modules and the command line."""


class RadBoltzError(Exception):
    """Base class for all errors raised by :mod:`radboltz`."""


class DomainError(RadBoltzError, ValueError):
    """An argument lies outside the domain of the function."""


class NumericalError(RadBoltzError, ArithmeticError):
    """A numerical procedure failed (non-finite state, step underflow, ...)."""


class QuadratureError(NumericalError):
    """Requested tolerances were not met within the subdivision budget."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DivergenceError(NumericalError):
    """The requested integral is not finite (e.g. the raw zeroth angular moment)."""


class SingularityError(NumericalError):
    """A singular integrand does not have the cancellation needed to be integrable."""


class TermBudgetError(NumericalError):
    """An exponential-sum mode needs more terms than the configured budget."""


class ConfigError(RadBoltzError, ValueError):
    """Invalid run configuration."""
