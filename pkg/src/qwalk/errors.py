"""Exception hierarchy shared by all qwalk modules."""


class QWalkError(Exception):
    """Base class for every error raised by qwalk."""


class DomainError(QWalkError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedConfigurationError(QWalkError, ValueError):
    """A lattice configuration that cannot be represented (e.g. periodic N < 3)."""


class UnsupportedRangeError(QWalkError, ValueError):
    """Arguments fall outside the supported evaluation envelope."""


class InsufficientDataError(QWalkError, ValueError):
    """Too few points to perform a fit."""


class NumericalFailure(QWalkError, ArithmeticError):
    """An iterative routine did not converge.

    ``residual`` is the largest off-diagonal magnitude left when the iteration
    budget ran out; ``size`` is the lattice side length, when known.
    """

    def __init__(self, message, residual=float("nan"), size=None):
        super().__init__(message)
        self.residual = residual
        self.size = size
