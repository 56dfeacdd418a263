"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ChronoAlignError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ChronoAlignError, ValueError):
    """A value violates a documented invariant."""


class ConfigError(ValidationError):
    """A configuration value is out of range or unknown."""


class DomainError(ChronoAlignError, ValueError):
    """A time point lies outside the domain of a mapping."""


class PreconditionError(ChronoAlignError, ValueError):
    """An operation was called on input it does not accept."""


class CannotInterpolateError(ChronoAlignError, ValueError):
    """No anchored word exists to interpolate from."""


class UndefinedMetricError(ChronoAlignError, ValueError):
    """A rate has a zero denominator (empty reference)."""


class ParseError(ValidationError):
    """Malformed input document.

    ``line`` is 1-based when known; ``field`` names the offending field.
    """

    def __init__(self, message: str, *, source: str | None = None,
                 line: int | None = None, field: str | None = None) -> None:
        self.source = source
        self.line = line
        self.field = field
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field!r}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
