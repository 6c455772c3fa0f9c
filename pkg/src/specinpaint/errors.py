"""Shared exception types."""


class SpecinpaintError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SpecinpaintError, ValueError):
    """An argument violates an operation's preconditions."""


class InvalidConfigError(SpecinpaintError, ValueError):
    """A configuration object is internally inconsistent."""


class InvalidShapeError(InvalidInputError):
    """Operand shapes are incompatible."""


class NumericError(SpecinpaintError, ArithmeticError):
    """A computation produced NaN or Inf."""


class InvalidDatasetError(SpecinpaintError, ValueError):
    """A dataset directory or metadata file is unusable."""


class InvalidStoreError(SpecinpaintError, ValueError):
    """A codemap store file is corrupt or has the wrong version."""


class UnavailableModelError(SpecinpaintError, RuntimeError):
    """A required model checkpoint is not loaded."""
