# packages/core/phumobcal_core/nn/losses.py
from __future__ import annotations

import numpy as np

from phumobcal_core.shared.errors import DimensionMismatchError


def mse(predicted: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over every element; returns (loss, dLoss/dPredicted)."""
    pred = np.asarray(predicted, dtype=np.float64)
    tgt = np.asarray(target, dtype=np.float64)
    if pred.shape != tgt.shape:
        raise DimensionMismatchError(f"prediction shape {pred.shape} does not match target {tgt.shape}")
    diff = pred - tgt
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size
