"""Exception types shared across the package."""


class SafsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(SafsError):
    """The input data violates a precondition (bad CSV, non-binary outcome,
    out-of-range index, degenerate outcome, ...)."""


class SearchSpaceError(SafsError):
    """An exhaustive enumeration was requested over a space above the guard."""
