"""Exception types raised across the package."""


class Rank2SepError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(Rank2SepError, ValueError):
    pass


class InvalidState(Rank2SepError, ValueError):
    """A state violates a normalization, orthogonality or Hermiticity invariant."""


class NotDensityMatrix(InvalidState):
    pass


class NotRankTwo(Rank2SepError, ValueError):
    pass


class NotSeparable(Rank2SepError, ValueError):
    pass


class ComplexInput(Rank2SepError, ValueError):
    """Raised by the real-coefficient branch when amplitudes carry imaginary parts."""


class InconsistentRoots(Rank2SepError, ValueError):
    pass


class E2Separable(Rank2SepError, ValueError):
    pass


class NotOrthogonalToGHZ(Rank2SepError, ValueError):
    pass


class StateFileError(Rank2SepError, ValueError):
    """Malformed state file. ``location`` names the offending line or field."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
