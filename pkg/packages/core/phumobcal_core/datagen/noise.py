# packages/core/phumobcal_core/datagen/noise.py
from __future__ import annotations

import math
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np

from phumobcal_core.domain.curves import CURRENT_FLOOR, IVCurve


class NoiseDomain(StrEnum):
    CURRENT = "current"
    LOG_CURRENT = "log_current"


def noise_sigma(signal: np.ndarray, snr_db: float) -> np.ndarray:
    """Per-row standard deviation giving noise power = mean(signal^2) / 10^(snr_db/10)."""
    rows = np.atleast_2d(signal)
    power = np.mean(rows * rows, axis=1) / 10.0 ** (snr_db / 10.0)
    return np.sqrt(power)


def noise_draw(signal: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Additive noise matrix for a (curves x points) signal, before any clamping."""
    rows = np.atleast_2d(signal)
    return rng.standard_normal(rows.shape) * noise_sigma(rows, snr_db)[:, None]


def add_noise_batch(
    currents: np.ndarray,
    snr_db: float,
    rng: np.random.Generator,
    domain: NoiseDomain = NoiseDomain.CURRENT,
) -> np.ndarray:
    """
    White Gaussian noise on a (curves x points) current matrix, one noise power per
    curve. `snr_db = inf` returns an unchanged copy. Results are clamped at the
    current floor.
    """
    base = np.array(currents, dtype=np.float64, copy=True, ndmin=2)
    if math.isinf(snr_db) and snr_db > 0:
        return base

    if domain is NoiseDomain.LOG_CURRENT:
        signal = np.log10(np.maximum(base, CURRENT_FLOOR))
        noisy = signal + noise_draw(signal, snr_db, rng)
        return np.maximum(10.0**noisy, CURRENT_FLOOR)

    noisy = base + noise_draw(base, snr_db, rng)
    return np.maximum(noisy, CURRENT_FLOOR)


def add_noise(curve: IVCurve, snr_db: float, seed: int) -> IVCurve:
    """Additive white noise on the linear currents at the given SNR."""
    if math.isinf(snr_db) and snr_db > 0:
        return curve
    noisy = add_noise_batch(curve.currents, snr_db, np.random.default_rng(seed))
    return curve.with_currents(noisy[0])


def add_log_noise(curve: IVCurve, snr_db: float, seed: int) -> IVCurve:
    """Same SNR definition applied to log10 currents (multiplicative measurement noise)."""
    if math.isinf(snr_db) and snr_db > 0:
        return curve
    noisy = add_noise_batch(curve.currents, snr_db, np.random.default_rng(seed), NoiseDomain.LOG_CURRENT)
    return curve.with_currents(noisy[0])
