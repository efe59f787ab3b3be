"""Exception hierarchy shared by every poissonkit module."""

from __future__ import annotations


class KitError(Exception):
    """Base class for all errors raised by poissonkit.

    ``line`` and ``offset`` are filled in when the error can be tied to a
    location in a session script or an expression string.
    """

    def __init__(self, message: str, *, line: int | None = None, offset: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.offset = offset

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.offset is not None:
            where.append(f"offset {self.offset}")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message


class ParseError(KitError):
    """Malformed expression or script text."""


class UnknownNameError(KitError):
    pass


class CyclicDefinitionError(KitError):
    pass


class DuplicateDefinitionError(KitError):
    pass


class MissingDimensionError(KitError):
    pass


class NonIntegerExponentError(KitError):
    pass


class NonPolynomialRadicandError(KitError):
    pass


class DivisionByZeroError(KitError, ZeroDivisionError):
    pass


class UnknownVariableError(KitError):
    pass


class SpaceMismatchError(KitError):
    pass


class PoleAtPointError(KitError):
    pass
