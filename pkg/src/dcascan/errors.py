"""Exception types shared across the package."""

from __future__ import annotations


class DcaError(Exception):
    """Base class for all errors raised by this package."""


class StreamParseError(DcaError):
    """A malformed line was found while parsing an event file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(DcaError):
    """A value violates a documented range or structural constraint."""


class ConfigError(DcaError):
    """A configuration key or value is unusable."""


class EngineInvariantError(DcaError):
    """An internal accounting invariant of the engine was broken."""
