"""Exception hierarchy shared by the library and the command line."""


class GeomPhaseError(Exception):
    """Base class for every error raised by geomphase."""


class InvalidSpecError(GeomPhaseError, ValueError):
    """A request lies outside the domain of the computation."""


class UnsupportedError(InvalidSpecError):
    """The requested closed form only exists for a specific spin."""


class NumericalError(GeomPhaseError, ArithmeticError):
    """The computation cannot be carried out reliably."""


class RankFloorError(NumericalError):
    """A thermal state is too close to rank-deficient."""


class PoleError(NumericalError):
    """A stereographic parameter sits on (or next to) its pole at theta = pi."""


class CriticalPointError(NumericalError):
    """The phase is undefined because the trace it is taken from vanishes."""

    def __init__(self, message: str, magnitude: float):
        super().__init__(message)
        self.magnitude = magnitude


class TransportViolationError(NumericalError):
    """An evolution does not satisfy the interferometric parallel-transport condition."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual
