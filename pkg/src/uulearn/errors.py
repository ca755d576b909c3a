"""Exception hierarchy shared by every module in the package."""


class UULearnError(Exception):
    """Base class for all package errors."""


class DomainError(UULearnError, ValueError):
    """A numeric argument lies outside the domain of the operation."""


class UnsupportedLossError(UULearnError, ValueError):
    """The loss cannot be used for the requested operation."""


class DegeneratePriorsError(UULearnError, ValueError):
    """Class priors are out of range or the two training priors coincide."""


class SingleClassError(UULearnError, ValueError):
    """The problem collapses to a single class (prior of 0 or 1)."""


class ShapeError(UULearnError, ValueError):
    """Input dimensions do not match the model."""


class EmptySampleError(UULearnError, ValueError):
    """An estimator received an empty sample."""


class UnsupportedModelError(UULearnError, TypeError):
    """The operation is only defined for a different model family."""


class ConfigError(UULearnError, ValueError):
    """Invalid experiment, model or training configuration."""


class DataExhaustedError(UULearnError, ValueError):
    """A sampling plan needs points from an empty pool."""


class ParseError(UULearnError, ValueError):
    """Malformed dataset file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AbortedRunError(UULearnError, RuntimeError):
    """Training diverged (non-finite gradient or parameters)."""

    def __init__(self, message, epoch):
        self.epoch = epoch
        super().__init__(f"epoch {epoch}: {message}")
