"""Exception types shared across the package."""


class RfAdvError(Exception):
    """Base class for all package errors."""


class ShapeMismatchError(RfAdvError):
    """An array does not have the shape a layer or model expects."""


class DegenerateGradientError(RfAdvError):
    """A gradient required to have nonzero norm turned out to be zero."""


class NonFiniteGradientError(RfAdvError):
    """An optimizer received NaN or infinite gradients."""


class ConvergenceError(RfAdvError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class FileFormatError(RfAdvError):
    """A binary artifact file is corrupt, truncated or has the wrong version."""


class TrainingDivergedError(RfAdvError):
    """Training produced a non-finite loss."""


class ValidationError(RfAdvError):
    """A CLI parameter or config value is out of range."""
