"""Exception hierarchy shared by all modules."""


class AbelianWalkError(Exception):
    """Base class for library errors."""


class DomainError(AbelianWalkError, ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(AbelianWalkError):
    """The requested object is too large to materialize."""


class UnsupportedOperationError(AbelianWalkError):
    """The operation is not defined for this kind of input (e.g. even d)."""


class NotErgodicError(AbelianWalkError):
    """A mixing quantity was requested for a non-ergodic transition matrix."""
