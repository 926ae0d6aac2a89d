"""Exception and warning types.

Every error carries a ``kind`` string so the command line can report it as
machine-readable JSON without a lookup table.
"""


class ImpaError(ValueError):
    """Base class for domain and validation errors."""

    @property
    def kind(self):
        return type(self).__name__


class InvalidSpec(ImpaError):
    pass


class DesignInfeasible(ImpaError):
    pass


class DomainError(ImpaError):
    pass


class InvalidGeometry(ImpaError):
    pass


class BracketError(ImpaError):
    pass


class WidthSolveFailure(ImpaError):
    pass


class GridMismatch(ImpaError):
    pass


class SingularConversion(ImpaError):
    pass


class DivergentInductance(ImpaError):
    pass


class InvalidTarget(ImpaError):
    pass


class BelowThreshold(ImpaError):
    pass


class IdlerOutOfRange(ImpaError):
    pass


class DivisionDomain(ImpaError):
    pass


class Unphysical(ImpaError):
    pass


class NonConvergence(ImpaError):
    pass


class DegenerateData(ImpaError):
    pass


class PoorFit(ImpaError):
    pass


class NoCompression(ImpaError):
    pass


class IoError(OSError):
    """File could not be written or parsed."""

    @property
    def kind(self):
        return "IoError"


class NearInstability(RuntimeWarning):
    """Gain denominator is close to the parametric oscillation threshold."""


class NonMonotonic(RuntimeWarning):
    """Gain rises above its small-signal value in the middle of a power sweep."""
