"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems
exit 2, data problems exit 3, analysis problems exit 4.
"""

from __future__ import annotations


class FeedAuditError(Exception):
    """Base class for all package errors."""


class ConfigError(FeedAuditError):
    """Invalid configuration or parameter value."""


class DataError(FeedAuditError):
    """Input data is missing, empty, or structurally unusable."""


class ParseError(DataError):
    """A stored log line could not be parsed.

    Carries the source path and 1-based line number when known.
    """

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class AnalysisError(FeedAuditError):
    """A computation has no defined result for the given inputs."""
