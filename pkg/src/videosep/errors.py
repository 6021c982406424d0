"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Matrix or vector dimensions are incompatible with the operation."""


class InsufficientFramesError(ValueError):
    """Fewer frames than the operation needs (at least two snapshots)."""


class DegenerateDataError(ValueError):
    """Input data carries no usable signal (e.g. an all-zero snapshot block)."""


class FormatError(ValueError):
    """A file does not conform to the expected on-disk format."""


class FitError(ValueError):
    """Curve fit is impossible on the given records."""


class UnsupportedError(ValueError):
    """Requested operation is outside what this implementation supports."""
