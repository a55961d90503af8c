# packages/core/phumobcal_core/physics/phumob.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Final

from phumobcal_core.domain.params import PhuMobParams
from phumobcal_core.shared.errors import DomainError

N_REF_SCALE: Final[float] = 6.0e15  # cm^-3, fixed reference inside the mu_DAeh term
T_REF: Final[float] = 300.0  # K
T_MIN: Final[float] = 100.0
T_MAX: Final[float] = 600.0


@dataclass(frozen=True, slots=True)
class MobilityComponents:
    """All terms in cm^2/(V s)."""

    mu_l: float
    mu_n: float
    mu_c: float
    mu_daeh: float
    mu_total: float


def validate_phumob(params: PhuMobParams) -> None:
    if not params.mu_min > 0:
        raise DomainError(f"mu_min must be positive, got {params.mu_min}")
    if not params.mu_max > params.mu_min:
        raise DomainError(f"mu_max ({params.mu_max}) must exceed mu_min ({params.mu_min})")
    for name in ("n_ref", "alpha", "theta"):
        value = getattr(params, name)
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def mobility(params: PhuMobParams, temperature: float) -> MobilityComponents:
    """
    Lattice term and the impurity/carrier term combined by Matthiessen's rule:

        mu_L    = mu_max (300/T)^theta
        mu_N    = mu_max^2 / (mu_max - mu_min) * (T/300)^(3 alpha - 1.5)
        mu_c    = mu_max mu_min / (mu_max - mu_min) * (300/T)^0.5
        mu_DAeh = mu_N (N_ref / 6e15)^alpha + mu_c
        1/mu    = 1/mu_L + 1/mu_DAeh

    Raises:
        DomainError: if the parameters violate their invariants or T is outside [100, 600] K.
    """
    validate_phumob(params)
    if not T_MIN <= temperature <= T_MAX:
        raise DomainError(f"temperature {temperature} K outside [{T_MIN}, {T_MAX}] K")

    spread = params.mu_max - params.mu_min
    t_ratio = temperature / T_REF

    try:
        mu_l = params.mu_max * (1.0 / t_ratio) ** params.theta
        mu_n = params.mu_max * params.mu_max / spread * t_ratio ** (3.0 * params.alpha - 1.5)
        mu_c = params.mu_max * params.mu_min / spread * (1.0 / t_ratio) ** 0.5
        mu_daeh = mu_n * (params.n_ref / N_REF_SCALE) ** params.alpha + mu_c
        mu_total = 1.0 / (1.0 / mu_l + 1.0 / mu_daeh)
    except (OverflowError, ZeroDivisionError) as exc:
        raise DomainError(f"mobility out of floating-point range for {params} at {temperature} K") from exc

    if not math.isfinite(mu_total):
        raise DomainError(f"mobility overflow for {params} at {temperature} K")

    return MobilityComponents(mu_l=mu_l, mu_n=mu_n, mu_c=mu_c, mu_daeh=mu_daeh, mu_total=mu_total)
