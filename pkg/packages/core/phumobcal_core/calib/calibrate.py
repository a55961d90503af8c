# packages/core/phumobcal_core/calib/calibrate.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from phumobcal_core.calib.cohort import Cohort, CohortTruth
from phumobcal_core.calib.metrics import QuartileStats, quartile_stats, r2
from phumobcal_core.datagen.scaling import ScalerState, log_features
from phumobcal_core.domain.curves import IVCurve
from phumobcal_core.domain.params import DeviceGeometry, ParamVector, PhuMobParams
from phumobcal_core.physics.sbd import simulate
from phumobcal_core.pinn.losses import violation_mask
from phumobcal_core.pinn.models import AutoencoderModel, HeadModel
from phumobcal_core.pinn.training import method_label, predict_targets
from phumobcal_core.shared.errors import PhumobcalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class CurvePrediction:
    curve_id: str
    group: str
    params: ParamVector
    violation: bool


@dataclass(frozen=True, slots=True)
class CurveScore:
    curve_id: str
    r2_linear: float
    r2_log: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class CalibrationReport:
    """
    Output of `calibrate` (predictions and averaged parameters). `verify` returns a
    copy with re-simulated curves, per-curve scores and the R² quartiles filled in.
    """

    lambda_: float
    predictions: list[CurvePrediction]
    phumob: PhuMobParams
    group_temperatures: dict[str, float]
    workfunctions: dict[str, float]
    scores: list[CurveScore] = field(default_factory=list)
    simulated: dict[str, IVCurve] = field(default_factory=dict)
    quartiles_linear: QuartileStats | None = None
    quartiles_log: QuartileStats | None = None

    @property
    def label(self) -> str:
        return method_label(self.lambda_)

    @property
    def violations(self) -> int:
        return sum(p.violation for p in self.predictions)

    @property
    def is_verified(self) -> bool:
        return bool(self.scores)

    def calibrated_params(self, curve_id: str, group: str) -> ParamVector:
        """Averaged PhuMob, group-averaged T, the curve's own WF."""
        return ParamVector(
            temperature=self.group_temperatures[group],
            workfunction=self.workfunctions[curve_id],
            phumob=self.phumob,
        )

    def median_r2(self) -> tuple[float, float]:
        if self.quartiles_linear is None or self.quartiles_log is None:
            return math.nan, math.nan
        return self.quartiles_linear.median, self.quartiles_log.median


def average_phumob(targets: np.ndarray) -> PhuMobParams:
    """Arithmetic means over curves; N_ref is averaged in log10 space."""
    means = np.mean(np.atleast_2d(targets), axis=0)
    row = ParamVector.from_targets(means)
    return row.phumob


def calibrate(
    ae: AutoencoderModel,
    head: HeadModel,
    cohort: Cohort,
    *,
    input_scaler: ScalerState,
    target_scaler: ScalerState,
    lambda_: float,
) -> CalibrationReport:
    """Predict every curve, average the PhuMob parameters over the cohort and T per group."""
    targets = predict_targets(ae, head, cohort.currents(), input_scaler=input_scaler, target_scaler=target_scaler)
    flags = violation_mask(targets)
    predictions = [
        CurvePrediction(curve_id=c.curve_id, group=c.group, params=ParamVector.from_targets(row), violation=bool(flag))
        for c, row, flag in zip(cohort.curves, targets, flags, strict=True)
    ]

    group_temperatures: dict[str, float] = {}
    for group in cohort.groups:
        temps = [p.params.temperature for p in predictions if p.group == group]
        group_temperatures[group] = float(np.mean(temps))

    report = CalibrationReport(
        lambda_=lambda_,
        predictions=predictions,
        phumob=average_phumob(targets),
        group_temperatures=group_temperatures,
        workfunctions={p.curve_id: p.params.workfunction for p in predictions},
    )
    logger.info(
        "%s calibration: mu_max=%.2f mu_min=%.2f log10_n_ref=%.3f alpha=%.3f theta=%.3f violations=%d/%d",
        report.label,
        report.phumob.mu_max,
        report.phumob.mu_min,
        report.phumob.log10_n_ref,
        report.phumob.alpha,
        report.phumob.theta,
        report.violations,
        len(predictions),
    )
    return report


def _score_curve(
    curve_id: str, measured: IVCurve, params: ParamVector, geometry: DeviceGeometry
) -> tuple[CurveScore, IVCurve | None]:
    try:
        simulated = simulate(params, geometry, measured.voltages)
        score = CurveScore(
            curve_id=curve_id,
            r2_linear=r2(measured.currents, simulated.currents),
            r2_log=r2(log_features(measured.currents), log_features(simulated.currents)),
        )
        return score, simulated
    except PhumobcalError as exc:
        reason = f"{type(exc).__name__}: {exc}"
        failed = CurveScore(curve_id=curve_id, r2_linear=math.nan, r2_log=math.nan, error=reason)
        return failed, None


def verify(
    report: CalibrationReport, cohort: Cohort, geometry: DeviceGeometry, *, n_jobs: int = 1
) -> CalibrationReport:
    """
    Re-simulate each curve with the calibrated parameters on the nominal geometry and
    score it on linear and log10 currents. Failures are kept per curve and left out
    of the quartiles.
    """
    jobs = [(c.curve_id, c.curve, report.calibrated_params(c.curve_id, c.group)) for c in cohort.curves]
    if n_jobs == 1:
        results = [_score_curve(cid, curve, params, geometry) for cid, curve, params in jobs]
    else:
        results = list(
            Parallel(n_jobs=n_jobs)(delayed(_score_curve)(cid, curve, params, geometry) for cid, curve, params in jobs)
        )

    scores = [score for score, _ in results]
    simulated = {score.curve_id: sim for score, sim in results if sim is not None}
    for score in scores:
        if not score.ok:
            logger.warning("Re-simulation of %s failed: %s", score.curve_id, score.error)

    good = [s for s in scores if s.ok]
    verified = replace(
        report,
        scores=scores,
        simulated=simulated,
        quartiles_linear=quartile_stats([s.r2_linear for s in good]) if good else None,
        quartiles_log=quartile_stats([s.r2_log for s in good]) if good else None,
    )
    lin, log = verified.median_r2()
    logger.info(
        "%s verification: median R2 linear=%.4f log=%.4f (%d/%d curves)", report.label, lin, log, len(good), len(scores)
    )
    return verified


@dataclass(frozen=True)
class TruthComparison:
    """Averaged parameters next to the hidden truth, plus per-curve T/WF relative errors."""

    averaged: dict[str, float]
    truth: dict[str, float]
    relative_errors: dict[str, float]
    temperature_errors: dict[str, float]
    workfunction_errors: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "averaged": self.averaged,
            "truth": self.truth,
            "relative_errors": self.relative_errors,
            "temperature_errors": self.temperature_errors,
            "workfunction_errors": self.workfunction_errors,
        }


def _phumob_row(p: PhuMobParams) -> dict[str, float]:
    return {"mu_max": p.mu_max, "mu_min": p.mu_min, "log10_n_ref": p.log10_n_ref, "alpha": p.alpha, "theta": p.theta}


def compare_with_truth(report: CalibrationReport, truth: CohortTruth) -> TruthComparison:
    """Scoring only; nothing on the prediction path calls this."""
    averaged = _phumob_row(report.phumob)
    expected = _phumob_row(truth.shared)
    return TruthComparison(
        averaged=averaged,
        truth=expected,
        relative_errors={k: abs(averaged[k] - expected[k]) / abs(expected[k]) for k in expected},
        temperature_errors={
            p.curve_id: abs(p.params.temperature - truth.params[p.curve_id].temperature)
            / truth.params[p.curve_id].temperature
            for p in report.predictions
        },
        workfunction_errors={
            p.curve_id: abs(p.params.workfunction - truth.params[p.curve_id].workfunction)
            / truth.params[p.curve_id].workfunction
            for p in report.predictions
        },
    )
