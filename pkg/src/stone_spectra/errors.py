"""Exception hierarchy.

Input problems derive from ``ValueError`` (the CLI maps them to exit code 2);
numerical failures derive from ``ArithmeticError`` (exit code 3).
"""


class SpectralError(Exception):
    """Base class for every error raised by stone_spectra."""


class DomainError(SpectralError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class PoleError(DomainError):
    """A parameter hits a pole (e.g. a nonpositive integer denominator)."""


class NumericalError(SpectralError, ArithmeticError):
    """A numerical procedure failed to deliver its accuracy contract."""


class NonConvergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ExtrapolationError(NumericalError):
    pass


class RouteDisagreementError(NumericalError):
    """Two independent evaluation routes disagree beyond tolerance."""


class BranchError(NumericalError):
    pass


class SingularityError(NumericalError):
    """A resolvent was requested too close to the spectrum."""
