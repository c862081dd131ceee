"""Exception hierarchy for corrspace.

Every error derives from a built-in so callers can keep catching
``ValueError`` or ``AssertionError``.
"""


class CorrspaceError(Exception):
    """Base class for corrspace errors."""


class DimensionError(CorrspaceError, ValueError):
    """Shapes do not match, an index is out of range, or a size cap is hit."""


class ResourceFormatError(CorrspaceError, ValueError):
    """A resource, error or Kraus file could not be parsed."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TPViolationError(CorrspaceError, ValueError):
    """A channel required to be trace preserving is not."""


class CapExceededError(CorrspaceError, ValueError):
    """An exact enumeration would exceed its configured cap."""


class ConfigError(CorrspaceError, ValueError):
    """Invalid run configuration."""


class ScientificAssertionError(CorrspaceError, AssertionError):
    """A computed result contradicts an asserted property."""
