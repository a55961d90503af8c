# packages/core/phumobcal_core/physics/sbd.py
"""
Compact forward model of a vertical Ga2O3 Schottky barrier diode.

Thermionic emission over the barrier phi_B = WF - chi, in series with the drift-layer
resistance set by the PhuMob mobility:

    I = A * A** T^2 exp(-phi_B / kT) * (exp((V - I R_s) / (n kT)) - 1)
    R_s = t_drift / (q mu N_d A) + R_contact
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Final

import numpy as np
from scipy import constants
from scipy.special import wrightomega

from phumobcal_core.domain.curves import DEFAULT_BIAS_GRID, IVCurve
from phumobcal_core.domain.params import DeviceGeometry, ParamVector
from phumobcal_core.physics.phumob import mobility
from phumobcal_core.shared.errors import DomainError, SolverConvergenceError

logger = logging.getLogger(__name__)

MAX_ITERATIONS: Final[int] = 200
REL_TOL: Final[float] = 1.0e-13
PRE_TURN_ON_DROP: Final[float] = 5.0e-4  # fraction of n kT/q

_K_OVER_Q: Final[float] = constants.k / constants.e  # V/K


@dataclass(frozen=True, slots=True)
class DiodeConstants:
    """Bias-independent quantities of one (params, geometry) pair."""

    saturation_current: float  # A
    n_vt: float  # V, ideality factor times kT/q
    series_resistance: float  # Ohm
    barrier: float  # eV

    def thermionic_current(self, junction_voltage: float) -> float:
        """Series-free thermionic emission current at the given junction bias."""
        return self.saturation_current * math.expm1(junction_voltage / self.n_vt)

    def residual(self, current: float, voltage: float) -> float:
        """f(I) = A J_TE(V - I R_s) - I, strictly decreasing in I."""
        return self.thermionic_current(voltage - current * self.series_resistance) - current

    def residual_slope(self, current: float, voltage: float) -> float:
        u = (voltage - current * self.series_resistance) / self.n_vt
        return -(self.series_resistance / self.n_vt) * self.saturation_current * math.exp(u) - 1.0

    def bracket(self, voltage: float) -> tuple[float, float]:
        """[0, min(A J_TE(V), V / R_s)]: f(0) >= 0 and f(upper) <= 0."""
        upper = self.thermionic_current(voltage)
        if self.series_resistance > 0:
            upper = min(upper, voltage / self.series_resistance)
        return 0.0, upper


def thermal_voltage(temperature: float) -> float:
    return _K_OVER_Q * temperature


def series_resistance(mu_total: float, geom: DeviceGeometry) -> float:
    drift = geom.drift_thickness / (constants.e * mu_total * geom.drift_doping * geom.anode_area)
    return drift + geom.contact_resistance


def diode_constants(params: ParamVector, geom: DeviceGeometry) -> DiodeConstants:
    barrier = params.workfunction - geom.electron_affinity
    if barrier <= 0:
        raise DomainError(
            f"Non-positive barrier height {barrier:.4f} eV "
            f"(WF={params.workfunction} eV, affinity={geom.electron_affinity} eV)"
        )
    mob = mobility(params.phumob, params.temperature)
    vt = thermal_voltage(params.temperature)
    log_is = math.log(geom.anode_area * geom.richardson_constant * params.temperature**2) - barrier / vt
    return DiodeConstants(
        saturation_current=math.exp(log_is),
        n_vt=geom.ideality_factor * vt,
        series_resistance=series_resistance(mob.mu_total, geom),
        barrier=barrier,
    )


def explicit_seed(voltages: np.ndarray, consts: DiodeConstants) -> np.ndarray:
    """
    Closed-form solution through the Wright omega function,
    I = (n Vt / R) * omega(ln(I_s R / n Vt) + (V + I_s R) / n Vt) - I_s.
    Used as the starting point of the Newton polish; cancellation near 0 V makes it
    a seed rather than the answer.
    """
    r, nvt, i_s = consts.series_resistance, consts.n_vt, consts.saturation_current
    z = math.log(i_s * r / nvt) + (np.asarray(voltages, dtype=np.float64) + i_s * r) / nvt
    omega = np.real(wrightomega(z))
    return omega * nvt / r - i_s


def _polish(voltage: float, consts: DiodeConstants, seed: float) -> float:
    """Newton iteration kept inside a shrinking bracket; bisects whenever a step leaves it."""
    lo, hi = consts.bracket(voltage)
    x = seed if (math.isfinite(seed) and lo < seed < hi) else 0.5 * (lo + hi)

    for _ in range(MAX_ITERATIONS):
        fx = consts.residual(x, voltage)
        if fx == 0.0:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x

        x_new = x - fx / consts.residual_slope(x, voltage)
        if not (math.isfinite(x_new) and lo < x_new < hi):
            x_new = 0.5 * (lo + hi)

        if abs(x_new - x) <= REL_TOL * abs(x_new) or hi - lo <= REL_TOL * hi:
            return x_new
        x = x_new

    raise SolverConvergenceError(
        f"Diode solve did not converge within {MAX_ITERATIONS} iterations at V={voltage} V "
        f"(I_s={consts.saturation_current:.3e} A, R_s={consts.series_resistance:.3e} Ohm)"
    )


def _solve_with(voltage: float, consts: DiodeConstants, seed: float | None = None) -> float:
    if voltage < 0:
        raise DomainError(f"Only forward bias is modelled, got V={voltage}")
    if voltage == 0.0:
        return 0.0
    if consts.series_resistance == 0.0:
        return consts.thermionic_current(voltage)
    if seed is None:
        seed = float(explicit_seed(np.array([voltage]), consts)[0])
    return _polish(voltage, consts, seed)


def solve_implicit(voltage: float, params: ParamVector, geom: DeviceGeometry) -> float:
    """
    Current through the diode at terminal bias `voltage`.

    Raises:
        DomainError: negative bias, invalid mobility parameters, or phi_B <= 0.
        SolverConvergenceError: iteration cap exceeded.
    """
    return _solve_with(float(voltage), diode_constants(params, geom))


def simulate(
    params: ParamVector,
    geom: DeviceGeometry,
    voltages: np.ndarray = DEFAULT_BIAS_GRID,
) -> IVCurve:
    """Forward sweep on `voltages` (the 0 V point is implied and not stored)."""
    consts = diode_constants(params, geom)
    bias = np.asarray(voltages, dtype=np.float64)[1:]
    seeds = explicit_seed(bias, consts) if consts.series_resistance > 0 else np.full(bias.shape, np.nan)
    currents = np.array(
        [_solve_with(float(v), consts, float(s)) for v, s in zip(bias, seeds, strict=True)],
        dtype=np.float64,
    )
    return IVCurve(voltages=voltages, currents=currents)


def pre_turn_on_mask(
    params: ParamVector,
    geom: DeviceGeometry,
    voltages: np.ndarray = DEFAULT_BIAS_GRID,
) -> np.ndarray:
    """
    Boolean mask over the stored points of `voltages` (0 V excluded) that sit below turn-on:
    V <= 0.8 phi_B and the series drop of the series-free current, I_TE(V) R_s, stays under
    PRE_TURN_ON_DROP * n kT/q. Mobility reaches the current only through that drop, so the
    currents selected here barely move with the PhuMob parameters.

    A low barrier or a large R_s can switch the diode on well before 0.8 phi_B; those points
    are excluded even though they pass the bias test.
    """
    consts = diode_constants(params, geom)
    bias = np.asarray(voltages, dtype=np.float64)[1:]
    drop = np.array([consts.thermionic_current(float(v)) for v in bias]) * consts.series_resistance
    return (bias <= 0.8 * consts.barrier) & (drop <= PRE_TURN_ON_DROP * consts.n_vt)
