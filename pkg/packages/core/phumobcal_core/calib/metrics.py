# packages/core/phumobcal_core/calib/metrics.py
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import astuple, dataclass

import numpy as np
from sklearn.metrics import r2_score

from phumobcal_core.domain.params import ParamVector
from phumobcal_core.pinn.losses import violation_mask
from phumobcal_core.shared.errors import ConstantSeriesError, DimensionMismatchError, DomainError


def r2(actual: np.ndarray, predicted: np.ndarray) -> float:
    """
    Coefficient of determination 1 - SS_res / SS_tot.

    Raises:
        DimensionMismatchError: lengths differ or fewer than two points.
        ConstantSeriesError: `actual` is constant, so SS_tot is zero.
    """
    y = np.asarray(actual, dtype=np.float64).reshape(-1)
    y_hat = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if y.size != y_hat.size:
        raise DimensionMismatchError(f"R² needs equal lengths, got {y.size} and {y_hat.size}")
    if y.size < 2:
        raise DimensionMismatchError(f"R² needs at least 2 points, got {y.size}")
    if np.all(y == y[0]):
        raise ConstantSeriesError("R² is undefined for a constant reference series")
    return float(r2_score(y, y_hat))


def count_violations(predictions: Sequence[ParamVector] | np.ndarray) -> int:
    """Predictions with mu_min >= mu_max. Accepts ParamVectors or physical target rows."""
    if isinstance(predictions, np.ndarray):
        rows = predictions
    else:
        if not predictions:
            return 0
        rows = np.stack([p.to_targets() for p in predictions])
    if rows.size == 0:
        return 0
    return int(np.count_nonzero(violation_mask(rows)))


@dataclass(frozen=True, slots=True)
class QuartileStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return astuple(self)

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def quartile_stats(values: Sequence[float] | np.ndarray) -> QuartileStats:
    """Five-number summary with linear interpolation between order statistics."""
    data = np.asarray(values, dtype=np.float64).reshape(-1)
    if data.size == 0:
        raise DomainError("quartile statistics need at least one value")
    qs = np.percentile(data, [0.0, 25.0, 50.0, 75.0, 100.0], method="linear")
    return QuartileStats(*(float(q) for q in qs))
