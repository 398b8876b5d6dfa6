"""Exception types raised across the package."""


class ParetoThreshError(Exception):
    """Base class for all package errors."""


class UnsupportedFormat(ParetoThreshError):
    """The file is readable but is not an 8-bit RGB raster we accept."""


class CorruptImage(ParetoThreshError):
    """The file claims a supported format but its contents are malformed."""


class DimensionMismatch(ParetoThreshError, ValueError):
    pass


class KindMismatch(ParetoThreshError, ValueError):
    pass


class EmptyArchive(ParetoThreshError):
    pass


class TooManyThresholds(ParetoThreshError, ValueError):
    pass


class ConfigInvalid(ParetoThreshError, ValueError):
    pass


class ClassOutOfRange(ParetoThreshError, IndexError):
    pass
