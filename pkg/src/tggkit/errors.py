"""Shared exception types."""

from __future__ import annotations


class TggError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(TggError):
    """An operation was called with arguments outside its contract."""


class ValidationError(TggError):
    """A model or rule failed validation.  Carries the violation list and,
    when raised while loading a document, the path of the offending part."""

    def __init__(self, message: str, violations=(), path: str | None = None):
        super().__init__(message if path is None else f"{message} (at {path})")
        self.violations = list(violations)
        self.path = path


class StaleMatchError(TggError):
    """The referenced match is no longer valid in the current state."""

    code = "STALE_MATCH"


class NoMatchError(TggError):
    """No match is available for the requested rule."""

    code = "NO_MATCH"


class DocumentError(TggError):
    """A document failed to parse or validate.

    ``path`` locates the failure inside the document, e.g.
    ``$.payload.rules[0].nodes[2].type``.
    """

    def __init__(self, code: str, path: str, message: str):
        super().__init__(f"{code} at {path}: {message}")
        self.code = code
        self.path = path
        self.detail = message
