# packages/core/phumobcal_core/shared/errors.py
from __future__ import annotations


class PhumobcalError(RuntimeError):
    """Base class for every error the calibration toolkit raises on purpose."""


class DomainError(PhumobcalError, ValueError):
    """Raised when physical inputs fall outside the domain of a model."""


class DimensionMismatchError(DomainError):
    """Raised when a vector or layer does not have the expected length."""


class ConstantSeriesError(DomainError):
    """Raised when R² is requested against a constant reference vector."""


class SolverConvergenceError(PhumobcalError):
    """Raised when the implicit diode equation does not converge within its cap."""


class StaleCacheError(PhumobcalError):
    """Raised when a backward pass is fed a cache from an older model version."""


class DegenerateScalerError(PhumobcalError):
    """Raised when a scaler dimension has zero range or zero variance."""


class TrainingDivergenceError(PhumobcalError):
    """Raised when the validation loss turns NaN during training."""

    def __init__(self, message: str, *, epoch: int, lambda_: float | None = None) -> None:
        super().__init__(message)
        self.epoch = epoch
        self.lambda_ = lambda_


class CheckpointFormatError(PhumobcalError):
    """Raised when a checkpoint file is malformed, inconsistent, or from another format version."""


class ConfigError(PhumobcalError):
    """Raised when a run configuration fails validation."""


class MissingArtifactError(PhumobcalError):
    """Raised when a prerequisite artifact is absent."""

    def __init__(self, path: str) -> None:
        super().__init__(f"Missing prerequisite artifact: {path}")
        self.path = path


class DigestMismatchError(PhumobcalError):
    """Raised when artifacts produced under different configurations are combined."""
