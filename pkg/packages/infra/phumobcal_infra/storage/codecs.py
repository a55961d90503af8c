# packages/infra/phumobcal_infra/storage/codecs.py
from __future__ import annotations

import math
from typing import Any

import numpy as np
import pandas as pd

from phumobcal_core.calib.calibrate import CalibrationReport, CurvePrediction, CurveScore, TruthComparison
from phumobcal_core.calib.cohort import Cohort, CohortCurve, CohortTruth
from phumobcal_core.calib.metrics import QuartileStats
from phumobcal_core.datagen.dataset import Dataset, DatasetRecord
from phumobcal_core.datagen.sampling import SamplingConfig, SplitTag
from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.domain.curves import N_FEATURES, IVCurve
from phumobcal_core.domain.params import TARGET_NAMES, DeviceGeometry, ParamVector, PhuMobParams
from phumobcal_core.pinn.sweep import SWEEP_COLUMNS, SweepResult, SweepRow
from phumobcal_core.pinn.training import AutoencoderEpoch, HeadEpoch
from phumobcal_core.shared.errors import CheckpointFormatError

CURRENT_COLUMNS = tuple(f"i_{k:02d}" for k in range(1, N_FEATURES + 1))
AE_HISTORY_COLUMNS = ("epoch", "train_mse", "val_mse")
HEAD_HISTORY_COLUMNS = ("epoch", "train_total", "train_mse", "train_phy", "val_total", "val_mse", "val_phy", "lambda")


def _float(value: Any) -> float:
    return math.nan if value is None else float(value)


def _currents(frame: pd.DataFrame, source: str) -> np.ndarray:
    missing = [c for c in CURRENT_COLUMNS if c not in frame.columns]
    if missing:
        raise CheckpointFormatError(f"{source}: missing current columns {missing[:3]}...")
    return frame[list(CURRENT_COLUMNS)].to_numpy(dtype=np.float64)


# --- dataset -------------------------------------------------------------------


def dataset_to_tables(dataset: Dataset) -> tuple[dict[str, Any], pd.DataFrame]:
    manifest = {
        "n_records": len(dataset),
        "split_sizes": dataset.split_sizes(),
        "voltages": dataset.records[0].curve.voltages.tolist() if dataset.records else [],
        "sampling": dataset.sampling.model_dump(mode="json"),
        "geometry": dataset.geometry.model_dump(mode="json"),
        "input_scaler": dataset.input_scaler.to_dict(),
        "target_scaler": dataset.target_scaler.to_dict(),
    }
    rows = []
    for i, record in enumerate(dataset.records):
        row: dict[str, Any] = {"index": i, "split": record.split.value}
        row.update(zip(CURRENT_COLUMNS, record.curve.currents.tolist(), strict=True))
        row.update(zip(TARGET_NAMES, record.params.to_targets().tolist(), strict=True))
        rows.append(row)
    frame = pd.DataFrame(rows, columns=["index", "split", *CURRENT_COLUMNS, *TARGET_NAMES])
    return manifest, frame


def dataset_from_tables(manifest: dict[str, Any], frame: pd.DataFrame, *, source: str) -> Dataset:
    try:
        voltages = np.asarray(manifest["voltages"], dtype=np.float64)
        currents = _currents(frame, source)
        records = [
            DatasetRecord(
                curve=IVCurve(voltages=voltages, currents=currents[i]),
                params=ParamVector.from_targets(np.array([row[name] for name in TARGET_NAMES])),
                split=SplitTag(row["split"]),
            )
            for i, row in enumerate(frame.to_dict(orient="records"))
        ]
        return Dataset(
            records=records,
            input_scaler=ScalerState.from_dict(manifest["input_scaler"]),
            target_scaler=ScalerState.from_dict(manifest["target_scaler"]),
            sampling=SamplingConfig.model_validate(manifest["sampling"]),
            geometry=DeviceGeometry.model_validate(manifest["geometry"]),
        )
    except (KeyError, ValueError) as exc:
        raise CheckpointFormatError(f"{source}: inconsistent dataset files ({exc})") from exc


# --- training histories --------------------------------------------------------


def ae_history_frame(history: list[AutoencoderEpoch]) -> pd.DataFrame:
    return pd.DataFrame(
        [(h.epoch, h.train_mse, h.val_mse) for h in history],
        columns=list(AE_HISTORY_COLUMNS),
    )


def head_history_frame(history: list[HeadEpoch]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (h.epoch, h.train.total, h.train.mse, h.train.phy, h.val.total, h.val.mse, h.val.phy, h.val.lambda_)
            for h in history
        ],
        columns=list(HEAD_HISTORY_COLUMNS),
    )


# --- sweep ---------------------------------------------------------------------


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    return pd.DataFrame([r.as_record() for r in result.rows], columns=list(SWEEP_COLUMNS))


def sweep_from_frame(frame: pd.DataFrame, minima: list[float]) -> SweepResult:
    rows = [
        SweepRow(
            lambda_=float(r["lambda"]),
            val_total=float(r["val_total"]),
            val_mse=float(r["val_mse"]),
            val_phy=float(r["val_phy"]),
            test_violations=int(r["test_violations"]),
        )
        for r in frame.to_dict(orient="records")
    ]
    return SweepResult(rows=rows, minima=[float(m) for m in minima])


# --- cohort --------------------------------------------------------------------


def cohort_frame(cohort: Cohort) -> pd.DataFrame:
    rows = []
    for c in cohort.curves:
        row: dict[str, Any] = {"curve_id": c.curve_id, "group": c.group}
        row.update(zip(CURRENT_COLUMNS, c.curve.currents.tolist(), strict=True))
        rows.append(row)
    return pd.DataFrame(rows, columns=["curve_id", "group", *CURRENT_COLUMNS])


def cohort_from_frame(frame: pd.DataFrame, voltages: np.ndarray, *, source: str) -> Cohort:
    currents = _currents(frame, source)
    return Cohort(
        curves=[
            CohortCurve(curve_id=str(cid), group=str(group), curve=IVCurve(voltages=voltages, currents=currents[i]))
            for i, (cid, group) in enumerate(zip(frame["curve_id"], frame["group"], strict=True))
        ]
    )


def _phumob_dict(p: PhuMobParams) -> dict[str, float]:
    return {"mu_max": p.mu_max, "mu_min": p.mu_min, "n_ref": p.n_ref, "alpha": p.alpha, "theta": p.theta}


def truth_to_dict(truth: CohortTruth) -> dict[str, Any]:
    return {
        "shared": _phumob_dict(truth.shared),
        "devices": {
            cid: {"params": truth.params[cid].to_dict(), "geometry": truth.geometries[cid].model_dump(mode="json")}
            for cid in truth.params
        },
    }


def truth_from_dict(document: dict[str, Any], *, source: str) -> CohortTruth:
    try:
        devices = document["devices"]
        return CohortTruth(
            params={cid: ParamVector.from_dict(d["params"]) for cid, d in devices.items()},
            geometries={cid: DeviceGeometry.model_validate(d["geometry"]) for cid, d in devices.items()},
            shared=PhuMobParams(**{k: float(v) for k, v in document["shared"].items()}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{source}: invalid ground-truth document ({exc})") from exc


# --- calibration ---------------------------------------------------------------


def _quartiles(q: QuartileStats | None) -> dict[str, float] | None:
    if q is None:
        return None
    return {"min": q.minimum, "q1": q.q1, "median": q.median, "q3": q.q3, "max": q.maximum}


def _quartiles_from(data: dict[str, float] | None) -> QuartileStats | None:
    if data is None:
        return None
    return QuartileStats(data["min"], data["q1"], data["median"], data["q3"], data["max"])


def calibration_to_dict(report: CalibrationReport, comparison: TruthComparison | None) -> dict[str, Any]:
    return {
        "label": report.label,
        "lambda": report.lambda_,
        "phumob": _phumob_dict(report.phumob),
        "group_temperatures": report.group_temperatures,
        "workfunctions": report.workfunctions,
        "violations": report.violations,
        "predictions": [
            {"curve_id": p.curve_id, "group": p.group, "violation": p.violation, "params": p.params.to_dict()}
            for p in report.predictions
        ],
        "scores": [
            {"curve_id": s.curve_id, "r2_linear": s.r2_linear, "r2_log": s.r2_log, "error": s.error}
            for s in report.scores
        ],
        "quartiles": {"linear": _quartiles(report.quartiles_linear), "log": _quartiles(report.quartiles_log)},
        "simulated_currents": {cid: curve.currents.tolist() for cid, curve in report.simulated.items()},
        "comparison": comparison.to_dict() if comparison is not None else None,
    }


def calibration_from_dict(
    document: dict[str, Any], voltages: np.ndarray, *, source: str
) -> tuple[CalibrationReport, TruthComparison | None]:
    try:
        report = CalibrationReport(
            lambda_=float(document["lambda"]),
            predictions=[
                CurvePrediction(
                    curve_id=p["curve_id"],
                    group=p["group"],
                    params=ParamVector.from_dict(p["params"]),
                    violation=bool(p["violation"]),
                )
                for p in document["predictions"]
            ],
            phumob=PhuMobParams(**{k: float(v) for k, v in document["phumob"].items()}),
            group_temperatures={k: float(v) for k, v in document["group_temperatures"].items()},
            workfunctions={k: float(v) for k, v in document["workfunctions"].items()},
            scores=[
                CurveScore(
                    curve_id=s["curve_id"],
                    r2_linear=_float(s["r2_linear"]),
                    r2_log=_float(s["r2_log"]),
                    error=s.get("error"),
                )
                for s in document["scores"]
            ],
            simulated={
                cid: IVCurve(voltages=voltages, currents=np.asarray(values, dtype=np.float64))
                for cid, values in document.get("simulated_currents", {}).items()
            },
            quartiles_linear=_quartiles_from(document["quartiles"]["linear"]),
            quartiles_log=_quartiles_from(document["quartiles"]["log"]),
        )
        raw = document.get("comparison")
        comparison = TruthComparison(**raw) if raw is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{source}: invalid calibration report ({exc})") from exc
    return report, comparison


def per_curve_frame(report: CalibrationReport) -> pd.DataFrame:
    scores = {s.curve_id: s for s in report.scores}
    rows = []
    for p in report.predictions:
        score = scores.get(p.curve_id)
        row: dict[str, Any] = {"curve_id": p.curve_id, "group": p.group}
        row.update(zip(TARGET_NAMES, p.params.to_targets().tolist(), strict=True))
        row["r2_linear"] = score.r2_linear if score else math.nan
        row["r2_log"] = score.r2_log if score else math.nan
        row["violation"] = int(p.violation)
        rows.append(row)
    return pd.DataFrame(rows, columns=["curve_id", "group", *TARGET_NAMES, "r2_linear", "r2_log", "violation"])
