# packages/core/phumobcal_core/datagen/scaling.py
from __future__ import annotations

from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any

import numpy as np
from sklearn.preprocessing import MinMaxScaler, StandardScaler

from phumobcal_core.domain.curves import CURRENT_FLOOR, IVCurve
from phumobcal_core.shared.errors import DegenerateScalerError, DimensionMismatchError


class ScalerKind(StrEnum):
    MINMAX = "minmax"
    STANDARD = "standard"


@dataclass(frozen=True, eq=False)
class ScalerState:
    """
    Fitted per-dimension statistics, stored exactly as fitted.

    minmax:   loc = train min,  ref = train max   (maps to [0, 1])
    standard: loc = train mean, ref = population std (zero mean, unit variance)
    """

    kind: ScalerKind
    loc: np.ndarray
    ref: np.ndarray

    @property
    def n_dims(self) -> int:
        return int(self.loc.size)

    @property
    def spread(self) -> np.ndarray:
        if self.kind is ScalerKind.MINMAX:
            return self.ref - self.loc
        return self.ref

    def to_dict(self) -> dict[str, Any]:
        if self.kind is ScalerKind.MINMAX:
            stats = {"min": self.loc.tolist(), "max": self.ref.tolist()}
        else:
            stats = {"mean": self.loc.tolist(), "std": self.ref.tolist()}
        return {"kind": self.kind.value, "n_dims": self.n_dims, **stats}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScalerState:
        kind = ScalerKind(data["kind"])
        if kind is ScalerKind.MINMAX:
            return _state(kind, data["min"], data["max"])
        return _state(kind, data["mean"], data["std"])

    def same_as(self, other: ScalerState) -> bool:
        return (
            self.kind is other.kind
            and np.array_equal(self.loc, other.loc)
            and np.array_equal(self.ref, other.ref)
        )


def _state(kind: ScalerKind, loc: Any, ref: Any) -> ScalerState:
    loc_arr = np.array(loc, dtype=np.float64).reshape(-1)
    ref_arr = np.array(ref, dtype=np.float64).reshape(-1)
    if loc_arr.shape != ref_arr.shape:
        raise DimensionMismatchError(f"scaler stats disagree in size: {loc_arr.size} vs {ref_arr.size}")
    state = ScalerState(kind=kind, loc=loc_arr, ref=ref_arr)
    degenerate = np.flatnonzero(~(state.spread > 0))
    if degenerate.size:
        raise DegenerateScalerError(
            f"{kind.value} scaler has zero spread in dimension(s) {degenerate.tolist()}; dataset is degenerate"
        )
    loc_arr.setflags(write=False)
    ref_arr.setflags(write=False)
    return state



def fit_scaler(kind: ScalerKind | str, train_features: np.ndarray) -> ScalerState:
    """Fit on the training split only."""
    kind = ScalerKind(kind)
    data = np.asarray(train_features, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise DimensionMismatchError(f"expected a non-empty 2-D feature matrix, got shape {data.shape}")
    if kind is ScalerKind.MINMAX:
        mm = MinMaxScaler().fit(data)
        return _state(kind, mm.data_min_, mm.data_max_)
    std = StandardScaler().fit(data)
    return _state(kind, std.mean_, np.sqrt(std.var_))


def _check_dims(state: ScalerState, values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[-1] != state.n_dims:
        raise DimensionMismatchError(f"scaler expects {state.n_dims} dimensions, got {arr.shape[-1]}")
    return arr


def transform(state: ScalerState, values: np.ndarray) -> np.ndarray:
    arr = _check_dims(state, values)
    return (arr - state.loc) / state.spread


def inverse_transform(state: ScalerState, values: np.ndarray) -> np.ndarray:
    arr = _check_dims(state, values)
    return arr * state.spread + state.loc


def log_features(currents: np.ndarray) -> np.ndarray:
    """log10 of floored currents, element-wise, any shape."""
    return np.log10(np.maximum(np.asarray(currents, dtype=np.float64), CURRENT_FLOOR))


def log_transform_currents(curve: IVCurve) -> np.ndarray:
    """The 51-point log10 feature vector fed to the standard scaler."""
    return log_features(curve.currents)
