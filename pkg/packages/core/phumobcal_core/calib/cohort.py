# packages/core/phumobcal_core/calib/cohort.py
"""
Synthetic pseudo-experimental cohort: devices sharing one drift layer (one set of
PhuMob parameters), each with its own workfunction and geometry spread, measured in
three temperature windows with additive measurement noise.

Hidden ground truth lives in `CohortTruth`, a separate object. Prediction and
calibration only ever receive a `Cohort`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from phumobcal_core.datagen.noise import NoiseDomain, add_noise_batch
from phumobcal_core.domain.curves import IVCurve
from phumobcal_core.domain.params import DeviceGeometry, ParamVector, PhuMobParams
from phumobcal_core.physics.sbd import simulate
from phumobcal_core.shared.seeding import SeedStream, make_rng

logger = logging.getLogger(__name__)

Interval = tuple[float, float]


class TruthPhuMob(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    mu_max: float = Field(default=153.0, gt=0)
    mu_min: float = Field(default=55.0, gt=0)
    log10_n_ref: float = 17.4
    alpha: float = Field(default=2.8, gt=0)
    theta: float = Field(default=2.3, gt=0)

    def to_params(self) -> PhuMobParams:
        return PhuMobParams(
            mu_max=self.mu_max,
            mu_min=self.mu_min,
            n_ref=10.0**self.log10_n_ref,
            alpha=self.alpha,
            theta=self.theta,
        )


class CohortConfig(BaseModel):
    """Defaults: 3 x 22 devices, 35 dB measurement noise, +/-30% drift-layer spread."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    groups: dict[str, Interval] = {
        "Temp1": (298.0, 308.0),
        "Temp2": (348.0, 368.0),
        "Temp3": (403.0, 423.0),
    }
    curves_per_group: int = Field(default=22, ge=1)
    workfunction: Interval = (5.05, 5.45)
    geometry_variation: float = Field(default=0.30, ge=0, lt=1)
    truth: TruthPhuMob = TruthPhuMob()
    snr_db: float | None = 35.0
    noise_domain: NoiseDomain = NoiseDomain.CURRENT

    @model_validator(mode="after")
    def _check(self) -> CohortConfig:
        if not self.groups:
            raise ValueError("at least one temperature group is required")
        for name, (lo, hi) in self.groups.items():
            if not 0 < lo <= hi:
                raise ValueError(f"group {name}: invalid temperature window ({lo}, {hi})")
        if not self.workfunction[0] <= self.workfunction[1]:
            raise ValueError(f"invalid workfunction window {self.workfunction}")
        if self.truth.mu_max <= self.truth.mu_min:
            raise ValueError("ground-truth mu_max must exceed mu_min")
        return self

    @property
    def n_curves(self) -> int:
        return self.curves_per_group * len(self.groups)


@dataclass(frozen=True, slots=True)
class CohortCurve:
    curve_id: str
    group: str
    curve: IVCurve


@dataclass(frozen=True)
class Cohort:
    """What the calibration loop is allowed to see: measured curves and group tags."""

    curves: list[CohortCurve]

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def groups(self) -> list[str]:
        return sorted({c.group for c in self.curves})

    def currents(self) -> np.ndarray:
        return np.stack([c.curve.currents for c in self.curves])


@dataclass(frozen=True)
class CohortTruth:
    """Hidden per-device parameters and geometry, for scoring only."""

    params: dict[str, ParamVector]
    geometries: dict[str, DeviceGeometry]
    shared: PhuMobParams


def curve_id(group: str, index: int) -> str:
    return f"{group}-{index:02d}"


def generate_cohort(config: CohortConfig, geometry: DeviceGeometry, *, seed: int) -> tuple[Cohort, CohortTruth]:
    rng = make_rng(seed, SeedStream.COHORT)
    shared = config.truth.to_params()
    spread = config.geometry_variation

    ids: list[str] = []
    tags: list[str] = []
    params: list[ParamVector] = []
    geometries: list[DeviceGeometry] = []
    for group, (t_lo, t_hi) in config.groups.items():
        for i in range(config.curves_per_group):
            ids.append(curve_id(group, i))
            tags.append(group)
            params.append(
                ParamVector(
                    temperature=float(rng.uniform(t_lo, t_hi)),
                    workfunction=float(rng.uniform(*config.workfunction)),
                    phumob=shared,
                )
            )
            geometries.append(
                geometry.scaled(
                    thickness_factor=float(rng.uniform(1.0 - spread, 1.0 + spread)),
                    doping_factor=float(rng.uniform(1.0 - spread, 1.0 + spread)),
                )
            )

    clean = [simulate(p, g) for p, g in zip(params, geometries, strict=True)]
    currents = np.stack([c.currents for c in clean])
    if config.snr_db is not None:
        currents = add_noise_batch(currents, config.snr_db, make_rng(seed, SeedStream.NOISE), config.noise_domain)

    curves = [
        CohortCurve(curve_id=cid, group=tag, curve=c.with_currents(row))
        for cid, tag, c, row in zip(ids, tags, clean, currents, strict=True)
    ]
    logger.info("Generated cohort of %d curves in groups %s", len(curves), list(config.groups))
    return (
        Cohort(curves=curves),
        CohortTruth(
            params=dict(zip(ids, params, strict=True)),
            geometries=dict(zip(ids, geometries, strict=True)),
            shared=shared,
        ),
    )
