"""Exception types raised by qsagnac."""


class DomainError(ValueError):
    """An argument lies outside the physical domain of an operation."""


class DegenerateStateError(ValueError):
    """The pump state carries no amplitude at all."""


class InsufficientDataError(ValueError):
    """Too few usable points or fits for the requested estimate."""


class RankDeficiencyError(ValueError):
    """A regression design matrix has no independent columns to fit."""


class PumpMismatchError(ValueError):
    """Two fits that must share a pump wavelength do not."""
