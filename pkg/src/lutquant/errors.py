"""Exception hierarchy shared by all lutquant modules."""


class LutQuantError(Exception):
    """Base class for every error raised by lutquant."""


class ConfigError(LutQuantError, ValueError):
    """Invalid format, quantization config or command-line combination."""


class FormatError(LutQuantError):
    """A file does not follow the FPM1/QLT1 layout (bad magic, empty model)."""


class CorruptionError(LutQuantError):
    """Truncated payload, short code buffer or out-of-range code."""


class DataError(LutQuantError, ValueError):
    """Non-finite or otherwise unusable numeric data."""


class ShapeError(LutQuantError, ValueError):
    """Dimension mismatch between a model and its inputs."""


class ShiftError(LutQuantError, ValueError):
    """A level does not fit below 2**-k for the requested virtual shift."""


class DegenerateDistribution(LutQuantError):
    """The parameter set has a single distinct value (or a single element)."""


class DegenerateSpan(LutQuantError):
    """The internal partition has zero width: inv_cdf(p_start) == inv_cdf(p_stop)."""


class EncodingError(LutQuantError, ValueError):
    """A code does not fit in the requested bit width."""
