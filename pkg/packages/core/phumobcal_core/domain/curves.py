# packages/core/phumobcal_core/domain/curves.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Final

import numpy as np

from phumobcal_core.shared.errors import DomainError

N_BIAS_POINTS: Final[int] = 52
N_FEATURES: Final[int] = N_BIAS_POINTS - 1
V_MAX: Final[float] = 4.0
CURRENT_FLOOR: Final[float] = 1.0e-14  # A


def bias_grid(n_points: int = N_BIAS_POINTS, v_max: float = V_MAX) -> np.ndarray:
    """Uniform forward-bias grid on [0, v_max]."""
    grid = np.linspace(0.0, v_max, n_points, dtype=np.float64)
    grid.setflags(write=False)
    return grid


DEFAULT_BIAS_GRID: Final[np.ndarray] = bias_grid()


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IVCurve:
    """
    One forward sweep. `currents` is aligned to `voltages[1:]`: the 0 V point carries
    zero current by construction and is not stored.
    """

    voltages: np.ndarray
    currents: np.ndarray

    def __post_init__(self) -> None:
        voltages = _frozen(self.voltages)
        currents = _frozen(self.currents)
        if voltages.size < 2:
            raise DomainError("An IV curve needs at least two bias points")
        if currents.size != voltages.size - 1:
            raise DomainError(
                f"Expected {voltages.size - 1} currents for {voltages.size} voltages, got {currents.size}"
            )
        if voltages[0] != 0.0:
            raise DomainError(f"First bias point must be 0 V, got {voltages[0]}")
        if np.any(np.diff(voltages) <= 0):
            raise DomainError("Bias points must be strictly increasing")
        object.__setattr__(self, "voltages", voltages)
        object.__setattr__(self, "currents", currents)

    @classmethod
    def on_default_grid(cls, currents: np.ndarray) -> IVCurve:
        return cls(voltages=DEFAULT_BIAS_GRID, currents=currents)

    @property
    def full_currents(self) -> np.ndarray:
        """Currents including the leading 0 A at 0 V, aligned to `voltages`."""
        return np.concatenate(([0.0], self.currents))

    def floored(self) -> np.ndarray:
        return np.maximum(self.currents, CURRENT_FLOOR)

    def log_currents(self) -> np.ndarray:
        """log10 of the floored currents (the log-scale view)."""
        return np.log10(self.floored())

    def with_currents(self, currents: np.ndarray) -> IVCurve:
        return IVCurve(voltages=self.voltages, currents=currents)

    def same_as(self, other: IVCurve) -> bool:
        return np.array_equal(self.voltages, other.voltages) and np.array_equal(self.currents, other.currents)
