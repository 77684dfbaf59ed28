"""Exception hierarchy shared by all wcsens modules."""


class WcsError(Exception):
    """Base class for all wcsens errors."""


class DistributionError(WcsError):
    """Invalid discrete distribution (lengths, signs, normalization)."""


class DomainError(WcsError):
    """Parameter outside the domain supported by the requested family."""


class UnsupportedFamilyError(WcsError):
    """Operation not defined for the requested uncertainty-set family."""


class SolverError(WcsError):
    """Iterative solver failed to converge.

    Carries the last residual norm so callers can judge how close the
    solve got before giving up.
    """

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class DataFormatError(WcsError):
    """Malformed input file; message names the offending row/column."""


class DegeneracyWarning(UserWarning):
    """Tail level hits a probability atom exactly; boundary convention used."""
