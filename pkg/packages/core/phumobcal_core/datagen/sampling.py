# packages/core/phumobcal_core/datagen/sampling.py
from __future__ import annotations

import math
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Final

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import qmc

from phumobcal_core.domain.params import ParameterRanges, ParamVector, PhuMobParams

LHS_AXES: Final[tuple[str, ...]] = (
    "temperature",
    "workfunction",
    "mu_min",
    "delta_mu",
    "log10_n_ref",
    "alpha",
    "theta",
)
"""Raw LHS dimensions. mu_max is derived as min(mu_min + delta_mu, mu_max ceiling)."""


class SplitTag(StrEnum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


class SamplingConfig(BaseModel):
    """Dataset sampling settings (defaults reproduce the reference corpus proportions)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_samples: int = Field(default=5891, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    ranges: ParameterRanges = ParameterRanges()
    split_fractions: tuple[float, float, float] = (0.72, 0.13, 0.15)

    @field_validator("split_fractions")
    @classmethod
    def _fractions_sum_to_one(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(f < 0 for f in value):
            raise ValueError(f"split fractions must be non-negative, got {value}")
        if abs(math.fsum(value) - 1.0) > 1e-12:
            raise ValueError(f"split fractions must sum to 1, got {value} (sum={math.fsum(value)!r})")
        return value


def lhs_unit(n_samples: int, n_dims: int, seed: int) -> np.ndarray:
    """Unit-cube LHS: each of the `n_samples` equal strata of every axis holds exactly one point."""
    sampler = qmc.LatinHypercube(d=n_dims, rng=np.random.default_rng(seed))
    return sampler.random(n_samples)


def lhs_raw(config: SamplingConfig) -> np.ndarray:
    """LHS draw scaled to the raw axes in `LHS_AXES` order (log10 axis for N_ref)."""
    r = config.ranges
    bounds = [r.temperature, r.workfunction, r.mu_min, r.delta_mu, tuple(map(math.log10, r.n_ref)), r.alpha, r.theta]
    lower = [lo for lo, _ in bounds]
    upper = [hi for _, hi in bounds]
    unit = lhs_unit(config.n_samples, len(LHS_AXES), config.seed)
    return qmc.scale(unit, lower, upper)


def lhs_sample(config: SamplingConfig) -> list[ParamVector]:
    """
    Constrained LHS draw of the 7-parameter space.

    mu_max > mu_min holds for every sample because the difference is sampled on a
    strictly positive axis and the ceiling clip stays above the mu_min range.
    """
    mu_ceiling = config.ranges.mu_max[1]
    samples: list[ParamVector] = []
    for t, wf, mu_min, delta, log_n_ref, alpha, theta in lhs_raw(config):
        samples.append(
            ParamVector(
                temperature=float(t),
                workfunction=float(wf),
                phumob=PhuMobParams(
                    mu_max=float(min(mu_min + delta, mu_ceiling)),
                    mu_min=float(mu_min),
                    n_ref=float(10.0**log_n_ref),
                    alpha=float(alpha),
                    theta=float(theta),
                ),
            )
        )
    return samples


def split_counts(n: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """floor / floor / remainder."""
    n_train = math.floor(n * fractions[0] + 1e-9)
    n_val = math.floor(n * fractions[1] + 1e-9)
    return n_train, n_val, n - n_train - n_val


def assign_splits(n: int, fractions: tuple[float, float, float], seed: int) -> list[SplitTag]:
    """Seeded shuffle of floor(0.72 n) train, floor(0.13 n) validation, remainder test tags."""
    n_train, n_val, n_test = split_counts(n, fractions)
    tags = np.array(
        [SplitTag.TRAIN] * n_train + [SplitTag.VALIDATION] * n_val + [SplitTag.TEST] * n_test,
        dtype=object,
    )
    order = np.random.default_rng(seed).permutation(n)
    return [SplitTag(t) for t in tags[order]]
