"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by adiabatic_lab."""


class ValidationError(LabError, ValueError):
    """Malformed input: non-Hermitian matrix, bad parameter, unknown key."""


class DegeneracyError(LabError):
    """Two instantaneous levels came closer than the degeneracy tolerance."""

    def __init__(self, message, levels=None, t=None):
        super().__init__(message)
        self.levels = levels
        self.t = t


class TrackingError(LabError):
    """Maximal-overlap level matching between consecutive frames was ambiguous."""


class ResolutionError(LabError):
    """A grid is too coarse for the oscillation or time scale it must resolve."""


class StepSizeError(ResolutionError):
    """Norm drift of a fixed-step integration exceeded its bound."""


class BudgetError(LabError):
    """An adaptive integrator exhausted its step budget."""


class FitError(LabError):
    """A log-log fit was requested on unusable data."""


class SizeError(ValidationError):
    """Problem size exceeds what a dense method supports."""


class SmoothnessWarning(UserWarning):
    """Spectral derivatives of a sampled potential look unreliable."""
