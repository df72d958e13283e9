"""Exception hierarchy shared by every module.

Callers that only care about "something about my input was wrong" can catch
``InvalidArgument`` (a ``ValueError``); numerical failures derive from
``NumericalError`` so the CLI can map them to a distinct exit code.
"""


class ManifoldWalkError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(ManifoldWalkError, ValueError):
    pass


class DimensionMismatch(InvalidArgument):
    def __init__(self, what, left, right):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch: {what} ({left} vs {right})")


class EmptyTrainingSet(InvalidArgument):
    pass


class DataFormatError(InvalidArgument):
    """Malformed delimited-text input. ``row`` and ``column`` are 0-based."""

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        loc = []
        if path is not None:
            loc.append(str(path))
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        prefix = ": ".join([", ".join(loc)]) + ": " if loc else ""
        super().__init__(prefix + message)


class EmptyDataError(DataFormatError):
    pass


class NumericalError(ManifoldWalkError, ArithmeticError):
    pass


class InstabilityError(NumericalError):
    """The walk system ``I - tA`` is singular or too close to it."""


class ConvergenceError(NumericalError):
    def __init__(self, message, last_estimate):
        self.last_estimate = last_estimate
        super().__init__(f"{message} (last estimate {last_estimate!r})")
