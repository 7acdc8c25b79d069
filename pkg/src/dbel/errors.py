"""Exception hierarchy shared by every subpackage."""


class DbelError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(DbelError, ValueError):
    """Tensor or array extents are incompatible."""


class ArgumentError(DbelError, ValueError):
    """A scalar argument is outside its permitted range."""


class StateError(DbelError, RuntimeError):
    """An operation was invoked in the wrong order (e.g. backward before forward)."""


class NumericError(DbelError, ArithmeticError):
    """A NaN or infinity appeared in a computed tensor."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""


class FormatError(DbelError, ValueError):
    """An image or file has an unsupported layout."""


class ConfigError(DbelError, ValueError):
    """A configuration value is inconsistent or out of range."""


class DataError(DbelError, ValueError):
    """A dataset is empty, single-class or otherwise unusable."""


class LayoutError(DataError):
    """A dataset directory does not have the expected class sub-folders."""


class TransplantError(DbelError, ValueError):
    """Donor weights cannot be copied into the target model."""


class LoadError(DbelError, IOError):
    """A persisted model is corrupt, truncated or of the wrong version."""
