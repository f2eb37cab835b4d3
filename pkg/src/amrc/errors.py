"""Exception types shared across the package."""


class AmrcError(Exception):
    """Base class for all amrc errors."""


class ShapeError(AmrcError, ValueError):
    """Grid shape, array length, or alignment mismatch."""


class DataError(AmrcError, ValueError):
    """Input data is unusable (non-finite values, size mismatch with metadata)."""


class ConfigError(AmrcError, ValueError):
    """Invalid compression configuration (criterion, domains, modes, packing)."""


class CorruptArtifactError(AmrcError):
    """Artifact byte stream failed validation.

    ``offset`` is the byte position at which parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFeatureError(AmrcError):
    """Artifact uses a feature this version does not implement."""
