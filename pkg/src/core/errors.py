"""Errors raised by the dataset model."""

from ..errors import AudvaultError


class FormatError(AudvaultError):
    """Raised when a header, table or cell cannot be parsed."""
    pass


class HeaderError(FormatError):
    """Raised when a header misses a mandatory field or has dangling references."""
    pass


class SchemeViolation(FormatError):
    """Raised when a value does not satisfy its column's scheme."""
    pass
