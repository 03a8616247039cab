"""Exception types shared across the pipeline."""


class PgmError(ValueError):
    """Malformed, truncated, or unsupported PGM data."""


class UniformImageError(ValueError):
    """Raised when an operation needs at least two distinct intensities."""


class EmptyImageError(ValueError):
    """Raised when an operation needs at least one ink pixel."""


class InsufficientInkError(ValueError):
    """Raised when there is too little ink to estimate anything."""


class InvalidBaselineError(ValueError):
    """Raised when a supplied baseline row lies outside the region."""


class PageGeometryError(ValueError):
    """Raised when a synthetic page description cannot be laid out."""
