"""Exception types shared across the package."""


class VfxError(Exception):
    """Base class for all package errors."""


class ValidationError(VfxError, ValueError):
    """A value, config, or data object violates its invariants."""


class SchemaError(ValidationError):
    """A JSON document does not match its expected schema."""


class NoMotionDetected(VfxError, RuntimeError):
    """Motion extraction found no moving frame in the input."""


class NumericsError(VfxError, RuntimeError):
    """Non-finite values appeared where finite ones are required."""
