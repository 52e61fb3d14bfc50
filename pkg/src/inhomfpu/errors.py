"""Exception hierarchy shared by all modules."""


class FPUError(Exception):
    """Base class for every error raised by :mod:`inhomfpu`."""


class InvalidDimensionError(FPUError, ValueError):
    """Chain length or state length is not acceptable."""


class PreconditionError(FPUError, ValueError):
    """An input violates a documented precondition (e.g. an asymmetric matrix)."""


class DomainError(FPUError, ValueError):
    """A parameter lies outside the domain where a formula is valid."""


class SingularFormulaError(FPUError, ArithmeticError):
    """A closed-form expression hits one of its excluded singular cases."""


class IncompleteSchemeError(FPUError):
    """The fiber scheme is not complete on the exceptional line eta = 4 xi + 3/16."""


class DegenerateSpectrumError(FPUError):
    """Two eigenvalues collide, so eigenvectors are not determined."""


class InconsistentTransformError(FPUError):
    """A transformation does not decouple the zero (translation) mode."""


class CoordinatePlaneError(FPUError, ValueError):
    """Polar normal-form coordinates are singular because an amplitude vanishes."""


class ModeNonexistentError(FPUError):
    """The requested periodic solution does not exist for these coefficients."""


class IntegrationError(FPUError, RuntimeError):
    """Numerical integration failed; ``partial`` holds whatever was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
