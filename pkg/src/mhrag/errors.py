"""Shared exception hierarchy.

Two broad families matter to callers: data problems (bad input files,
violated preconditions) and external-service failures (LLM endpoints).
The CLI maps them to distinct exit codes.
"""


class MhragError(Exception):
    """Base class for all package errors."""


class DataError(MhragError):
    """Invalid input data or violated precondition."""


class ExternalServiceError(MhragError):
    """Failure of an external dependency (LLM endpoint, provider)."""
