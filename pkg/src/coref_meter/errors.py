"""Exception types shared across the package."""

from __future__ import annotations


class CorefMeterError(Exception):
    """Base class for errors caused by bad input."""


class ParseError(CorefMeterError):
    """Malformed input file.  Carries the file, 1-based line and column."""

    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        self.column = column
        self.message = message
        where = []
        if self.path is not None:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ":".join(where[:1]) + (" (" + ", ".join(where[1:]) + ")" if where[1:] else "")
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(CorefMeterError):
    """Input parsed but violates a cross-file or semantic constraint."""


class UnknownWordError(CorefMeterError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvariantViolation(AssertionError):
    """Internal consistency check failed; this is a bug, not bad input."""
