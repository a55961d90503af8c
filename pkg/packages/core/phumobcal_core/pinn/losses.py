# packages/core/phumobcal_core/pinn/losses.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.domain.params import MU_MAX_SLOT, MU_MIN_SLOT, N_TARGETS, ParameterRanges
from phumobcal_core.nn.losses import mse
from phumobcal_core.shared.errors import DimensionMismatchError

DEFAULT_PHYSICS_NORMALIZATION = ParameterRanges().mu_max_width  # 1978 cm^2/(V s)


@dataclass(frozen=True, slots=True)
class LossBreakdown:
    """total = lambda * phy + mse."""

    total: float
    mse: float
    phy: float
    lambda_: float

    @classmethod
    def combine(cls, *, mse: float, phy: float, lambda_: float) -> LossBreakdown:
        return cls(total=lambda_ * phy + mse, mse=mse, phy=phy, lambda_=lambda_)


def _mobility_columns(predicted_scaled: np.ndarray, target_scaler: ScalerState) -> tuple[np.ndarray, np.ndarray]:
    pred = np.atleast_2d(np.asarray(predicted_scaled, dtype=np.float64))
    if pred.shape[1] != N_TARGETS:
        raise DimensionMismatchError(f"expected {N_TARGETS} prediction slots, got {pred.shape[1]}")
    spread, loc = target_scaler.spread, target_scaler.loc
    mu_max = pred[:, MU_MAX_SLOT] * spread[MU_MAX_SLOT] + loc[MU_MAX_SLOT]
    mu_min = pred[:, MU_MIN_SLOT] * spread[MU_MIN_SLOT] + loc[MU_MIN_SLOT]
    return mu_max, mu_min


def physics_loss(
    predicted_scaled: np.ndarray,
    target_scaler: ScalerState,
    normalization: float = DEFAULT_PHYSICS_NORMALIZATION,
) -> float:
    """Batch mean of max(0, mu_min - mu_max) in physical units, divided by `normalization`."""
    mu_max, mu_min = _mobility_columns(predicted_scaled, target_scaler)
    return float(np.mean(np.maximum(0.0, mu_min - mu_max)) / normalization)


def physics_loss_grad(
    predicted_scaled: np.ndarray,
    target_scaler: ScalerState,
    normalization: float = DEFAULT_PHYSICS_NORMALIZATION,
) -> tuple[float, np.ndarray]:
    """Value and gradient w.r.t. the scaled predictions. Subgradient 0 at mu_min == mu_max."""
    pred = np.atleast_2d(np.asarray(predicted_scaled, dtype=np.float64))
    mu_max, mu_min = _mobility_columns(pred, target_scaler)
    gap = mu_min - mu_max
    active = (gap > 0).astype(np.float64)
    batch = pred.shape[0]

    grad = np.zeros_like(pred)
    grad[:, MU_MIN_SLOT] = active * target_scaler.spread[MU_MIN_SLOT] / (normalization * batch)
    grad[:, MU_MAX_SLOT] = -active * target_scaler.spread[MU_MAX_SLOT] / (normalization * batch)
    return float(np.mean(np.maximum(0.0, gap)) / normalization), grad


def violation_mask(targets_physical: np.ndarray) -> np.ndarray:
    """True where the predicted mu_min >= mu_max."""
    rows = np.atleast_2d(targets_physical)
    return rows[:, MU_MIN_SLOT] >= rows[:, MU_MAX_SLOT]


class HeadObjective(Protocol):
    @property
    def lambda_(self) -> float: ...

    def evaluate(self, predicted: np.ndarray, target: np.ndarray) -> tuple[LossBreakdown, np.ndarray]: ...


@dataclass(frozen=True)
class MseObjective:
    """Plain regression loss."""

    lambda_: float = 0.0

    def evaluate(self, predicted: np.ndarray, target: np.ndarray) -> tuple[LossBreakdown, np.ndarray]:
        value, grad = mse(predicted, target)
        return LossBreakdown.combine(mse=value, phy=0.0, lambda_=0.0), grad


@dataclass(frozen=True)
class HybridObjective:
    """lambda * L_PHY + L_MSE. With lambda = 0 the gradient is exactly the MSE gradient."""

    lambda_: float
    target_scaler: ScalerState
    normalization: float = DEFAULT_PHYSICS_NORMALIZATION

    def evaluate(self, predicted: np.ndarray, target: np.ndarray) -> tuple[LossBreakdown, np.ndarray]:
        mse_value, grad = mse(predicted, target)
        phy_value, phy_grad = physics_loss_grad(predicted, self.target_scaler, self.normalization)
        if self.lambda_ != 0.0:
            grad = grad + self.lambda_ * phy_grad
        return LossBreakdown.combine(mse=mse_value, phy=phy_value, lambda_=self.lambda_), grad
