"""Exception types shared across the toolkit."""

from __future__ import annotations


class ProcMapError(Exception):
    """Base class for all toolkit errors."""


# -- processor-space algebra ------------------------------------------------

class DimOutOfRange(ProcMapError):
    pass


class NonDivisibleSplit(ProcMapError):
    pass


class BadDimOrder(ProcMapError):
    pass


class BadSliceBounds(ProcMapError):
    pass


class ProductMismatch(ProcMapError):
    pass


class IndexOutOfRange(ProcMapError):
    pass


# -- objectives and volume models --------------------------------------------

class ShapeMismatch(ProcMapError):
    pass


class TooLarge(ProcMapError):
    """Cell enumeration would exceed the configured cap."""


# -- mapping DSL ---------------------------------------------------------------

class MapperSyntaxError(ProcMapError):
    """Parse failure with source position and what was expected."""

    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.expected = expected


class EvalError(ProcMapError):
    pass


class NoBinding(ProcMapError):
    """Task name has no IndexTaskMap statement."""


# -- task graph and simulator --------------------------------------------------

class SchemaError(ProcMapError):
    pass


class CyclicDependence(ProcMapError):
    pass


class MultipleRoots(ProcMapError):
    pass


class EmptyTask(ProcMapError):
    pass


class Stuck(ProcMapError):
    """No transition rule applies but tasks remain unexecuted."""

    def __init__(self, message: str, blocked: list[str] | None = None):
        super().__init__(message)
        self.blocked = blocked or []
