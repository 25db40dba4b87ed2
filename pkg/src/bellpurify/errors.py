"""Exception hierarchy shared by all modules."""


class PurificationError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PurificationError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegeneratePosteriorError(PurificationError):
    """Observed data has zero probability under the current prior."""


class CapacityError(PurificationError):
    """A request exceeds the exact-enumeration capacity."""
