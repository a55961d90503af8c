# packages/core/phumobcal_core/domain/params.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Final

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from phumobcal_core.shared.errors import DimensionMismatchError

TARGET_NAMES: Final[tuple[str, ...]] = (
    "temperature",
    "workfunction",
    "mu_max",
    "mu_min",
    "log10_n_ref",
    "alpha",
    "theta",
)
"""Order of the 7 regression targets. N_ref is regressed as log10(N_ref)."""

N_TARGETS: Final[int] = len(TARGET_NAMES)
MU_MAX_SLOT: Final[int] = TARGET_NAMES.index("mu_max")
MU_MIN_SLOT: Final[int] = TARGET_NAMES.index("mu_min")
PHUMOB_SLOTS: Final[tuple[int, ...]] = (2, 3, 4, 5, 6)


@dataclass(frozen=True, slots=True)
class PhuMobParams:
    """
    Philips unified mobility parameters.

    Invariants (mu_max > mu_min > 0, n_ref/alpha/theta > 0) are checked by
    `phumob.mobility`, not here: network predictions may violate them and must still
    be representable so they can be counted and flagged.
    """

    mu_max: float  # cm^2/(V s)
    mu_min: float  # cm^2/(V s)
    n_ref: float  # cm^-3
    alpha: float
    theta: float

    @property
    def log10_n_ref(self) -> float:
        return math.log10(self.n_ref)

    @property
    def is_ordered(self) -> bool:
        return self.mu_max > self.mu_min


@dataclass(frozen=True, slots=True)
class ParamVector:
    """The 7 calibration targets of one diode curve."""

    temperature: float  # K
    workfunction: float  # eV
    phumob: PhuMobParams

    def to_targets(self) -> np.ndarray:
        """Physical-unit target row in `TARGET_NAMES` order."""
        p = self.phumob
        return np.array(
            [self.temperature, self.workfunction, p.mu_max, p.mu_min, p.log10_n_ref, p.alpha, p.theta],
            dtype=np.float64,
        )

    @classmethod
    def from_targets(cls, row: np.ndarray) -> ParamVector:
        values = [float(v) for v in np.asarray(row, dtype=np.float64).reshape(-1)]
        if len(values) != N_TARGETS:
            raise DimensionMismatchError(f"expected {N_TARGETS} target values, got {len(values)}")
        t, wf, mu_max, mu_min, log_n_ref, alpha, theta = values
        return cls(
            temperature=t,
            workfunction=wf,
            phumob=PhuMobParams(
                mu_max=mu_max,
                mu_min=mu_min,
                n_ref=float(np.power(10.0, log_n_ref)),
                alpha=alpha,
                theta=theta,
            ),
        )

    def to_dict(self) -> dict[str, float]:
        p = self.phumob
        return {
            "temperature": self.temperature,
            "workfunction": self.workfunction,
            "mu_max": p.mu_max,
            "mu_min": p.mu_min,
            "n_ref": p.n_ref,
            "alpha": p.alpha,
            "theta": p.theta,
        }

    @classmethod
    def from_dict(cls, data: dict[str, float]) -> ParamVector:
        return cls(
            temperature=float(data["temperature"]),
            workfunction=float(data["workfunction"]),
            phumob=PhuMobParams(
                mu_max=float(data["mu_max"]),
                mu_min=float(data["mu_min"]),
                n_ref=float(data["n_ref"]),
                alpha=float(data["alpha"]),
                theta=float(data["theta"]),
            ),
        )

    def with_phumob(self, phumob: PhuMobParams) -> ParamVector:
        return ParamVector(temperature=self.temperature, workfunction=self.workfunction, phumob=phumob)

    def out_of_range(self, ranges: ParameterRanges) -> tuple[str, ...]:
        """Names of targets lying outside the generation ranges (closed intervals)."""
        bounds = ranges.target_bounds()
        return tuple(
            name
            for name, value, (lo, hi) in zip(TARGET_NAMES, self.to_targets(), bounds, strict=True)
            if not lo <= value <= hi
        )


Interval = tuple[float, float]


class ParameterRanges(BaseModel):
    """
    Closed generation intervals. `delta_mu` is the LHS axis for mu_max - mu_min;
    `n_ref` is given in cm^-3 and sampled on a log10 axis.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    temperature: Interval = (200.0, 500.0)
    workfunction: Interval = (5.0, 5.5)
    mu_max: Interval = (22.0, 2000.0)
    mu_min: Interval = (20.0, 1810.0)
    delta_mu: Interval = (2.0, 1980.0)
    n_ref: Interval = (1.0e17, 1.0e18)
    alpha: Interval = (1.0, 5.0)
    theta: Interval = (0.5, 5.0)

    @model_validator(mode="after")
    def _check_bounds(self) -> ParameterRanges:
        for name in type(self).model_fields:
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"range {name}: lower bound {lo} must be below upper bound {hi}")
        if self.n_ref[0] <= 0:
            raise ValueError("range n_ref must be strictly positive")
        if self.delta_mu[0] <= 0:
            raise ValueError("range delta_mu must be strictly positive")
        return self

    def target_bounds(self) -> list[Interval]:
        return [
            self.temperature,
            self.workfunction,
            self.mu_max,
            self.mu_min,
            (math.log10(self.n_ref[0]), math.log10(self.n_ref[1])),
            self.alpha,
            self.theta,
        ]

    @property
    def mu_max_width(self) -> float:
        return self.mu_max[1] - self.mu_max[0]


class DeviceGeometry(BaseModel):
    """
    Fixed device description handed to the forward simulator. Defaults are
    literature-typical Ga2O3 SBD values.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    drift_thickness: float = Field(default=10.0e-4, gt=0, description="cm")
    drift_doping: float = Field(default=1.0e16, gt=0, description="cm^-3")
    anode_area: float = Field(default=1.0e-4, gt=0, description="cm^2")
    electron_affinity: float = Field(default=4.0, gt=0, description="eV")
    richardson_constant: float = Field(default=41.0, gt=0, description="A cm^-2 K^-2")
    ideality_factor: float = Field(default=1.03, ge=1.0)
    contact_resistance: float = Field(default=0.0, ge=0, description="Ohm")

    def scaled(self, *, thickness_factor: float = 1.0, doping_factor: float = 1.0) -> DeviceGeometry:
        return self.model_copy(
            update={
                "drift_thickness": self.drift_thickness * thickness_factor,
                "drift_doping": self.drift_doping * doping_factor,
            }
        )
