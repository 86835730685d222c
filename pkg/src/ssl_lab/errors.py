"""Exception types shared across the package."""

from __future__ import annotations


class SslLabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SslLabError, ValueError):
    """An argument or input dataset violates an operation's contract."""


class ConvergenceError(SslLabError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    The last iterate is attached so callers can inspect or reuse it.
    """

    def __init__(self, message: str, *, last=None):
        super().__init__(message)
        self.last = last


class DataFormatError(SslLabError, ValueError):
    """Malformed tabular input: bad CSV structure, cells, or labels."""


class SchemaVersionError(DataFormatError):
    """A results file declares a schema version this build does not read."""
