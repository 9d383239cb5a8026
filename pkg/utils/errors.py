"""
Exception hierarchy shared by the geometry modules and the CLI.
"""

from config.constants import (
    EXIT_GEOMETRY_ERROR,
    EXIT_IO_ERROR,
    EXIT_RESOURCE_ERROR,
    EXIT_SCHEMA_ERROR,
)


class GeometryError(Exception):
    """Raised when numerical data does not make sense for the requested
    geometric object (coincident points, singular maps, and so on).
    """

    exit_code = EXIT_GEOMETRY_ERROR

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DimensionMismatchError(GeometryError):
    """Operands live in projective spaces of different dimension."""


class DegenerateConfigurationError(GeometryError):
    """A construction collapsed: coincident points, concurrent lines, overlapping discs."""

    def __init__(self, message, address=None, **details):
        super().__init__(message, address=address, **details)
        self.address = address


class UnsupportedCaseError(GeometryError):
    """Input outside the family a closed form or builder covers."""

    def __init__(self, message, diagnostic=None, **details):
        super().__init__(message, diagnostic=diagnostic or {}, **details)
        self.diagnostic = diagnostic or {}


class GroupMembershipError(GeometryError):
    """A map or point does not belong where the operation needs it."""


class ResourceLimitError(Exception):
    """Enumeration would exceed a configured bound."""

    exit_code = EXIT_RESOURCE_ERROR

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConfigSchemaError(Exception):
    """Malformed run config or input document."""

    exit_code = EXIT_SCHEMA_ERROR

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


def exit_code_for(exc):
    """CLI exit status of a known failure, None for anything else."""
    if isinstance(exc, OSError):
        return EXIT_IO_ERROR
    return getattr(exc, "exit_code", None)


def error_payload(exc):
    """Machine-readable description of an exception for stderr."""
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": exit_code_for(exc),
        "details": {k: _jsonable(v) for k, v in getattr(exc, "details", {}).items()},
    }


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)
