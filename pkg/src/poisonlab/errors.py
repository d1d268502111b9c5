"""Exception hierarchy shared across the package."""


class PoisonLabError(Exception):
    """Base class for all package errors."""


class ShapeError(PoisonLabError, ValueError):
    """Array shapes inconsistent with the model or dataset."""


class DomainError(PoisonLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class IdxFormatError(PoisonLabError, ValueError):
    """Base class for IDX binary parsing failures."""


class IdxMagicError(IdxFormatError):
    """Unexpected magic number in an IDX header."""


class IdxTruncatedError(IdxFormatError):
    """IDX payload shorter than its header promises."""


class IdxDimensionError(IdxFormatError):
    """IDX dimension sizes that are negative, zero, or implausibly large."""


class AttackDivergence(PoisonLabError, RuntimeError):
    """Attack optimization produced a non-finite merit (learning rate too high)."""


class TargetSelectionError(PoisonLabError, RuntimeError):
    """Every target candidate was filtered out; `stage` names the filter."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


class EmptyPartitionError(PoisonLabError, ValueError):
    """A partition of the training set received no samples (k too large)."""


class ConfigError(PoisonLabError, ValueError):
    """Experiment configuration failed validation."""
