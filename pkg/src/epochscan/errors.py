"""Exception types raised across the package."""


class EpochScanError(ValueError):
    """Base class for input and numerical errors raised by epochscan."""


class InputFormatError(EpochScanError):
    """A price file is malformed or violates the series invariants."""


class DegenerateSeriesError(EpochScanError):
    """A statistic is undefined for the input (zero variance, empty range)."""


class RankDeficientError(EpochScanError):
    """A regression design matrix does not have full column rank."""


class InsufficientDataError(EpochScanError):
    """The series is too short for the requested operation."""
