# packages/core/phumobcal_core/use_cases/build_report.py
from __future__ import annotations

import logging
from dataclasses import dataclass

from phumobcal_core.calib.summary import PHUMOB_FIELDS, MethodSummary, ReportSummary
from phumobcal_core.pinn.training import AE_NN_LABEL, AE_PINN_LABEL
from phumobcal_core.ports.artifact_store import (
    ArtifactStore,
    RunStamp,
    StoredCalibration,
    StoredHead,
    check_stamp,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuildReportResult:
    summary: ReportSummary
    written: list[str]


def _method_order(label: str) -> tuple[int, str]:
    return ({AE_NN_LABEL: 0, AE_PINN_LABEL: 1}.get(label, 2), label)


def summarize_method(head: StoredHead, calibration: StoredCalibration | None) -> MethodSummary:
    violations = {"Test": head.violations.get("test", 0), "Training": head.violations.get("train", 0)}
    if calibration is None:
        return MethodSummary(
            label=head.label,
            lambda_=head.lambda_,
            violations=violations,
            averaged={},
            r2_linear=[],
            r2_log=[],
            quartiles_linear=None,
            quartiles_log=None,
        )

    report = calibration.report
    violations["Experiment"] = report.violations
    ok = [s for s in report.scores if s.ok]
    p = report.phumob
    values = (p.mu_max, p.mu_min, p.log10_n_ref, p.alpha, p.theta)
    return MethodSummary(
        label=head.label,
        lambda_=head.lambda_,
        violations=violations,
        averaged=dict(zip(PHUMOB_FIELDS, values, strict=True)),
        r2_linear=[s.r2_linear for s in ok],
        r2_log=[s.r2_log for s in ok],
        quartiles_linear=report.quartiles_linear,
        quartiles_log=report.quartiles_log,
        failed_curves=len(report.scores) - len(ok),
    )


class BuildReport:
    """
    Combine stored heads, calibrations and the optional sweep into one summary.
    Refuses artifacts whose stamp differs from the current run.
    """

    def __init__(self, *, store: ArtifactStore) -> None:
        self._store = store

    def execute(self, stamp: RunStamp) -> BuildReportResult:
        labels = sorted(self._store.list_heads() or [AE_PINN_LABEL], key=_method_order)
        heads = [self._store.load_head(label) for label in labels]
        for head in heads:
            check_stamp(head.stamp, stamp, artifact=f"head {head.label}")

        calibrations: dict[str, StoredCalibration] = {}
        for label in self._store.list_calibrations():
            stored = self._store.load_calibration(label)
            check_stamp(stored.stamp, stamp, artifact=f"calibration {label}")
            calibrations[label] = stored

        notes: list[str] = []
        sweep_minima: list[float] | None = None
        sweep = self._store.load_sweep()
        if sweep is not None:
            result, sweep_stamp = sweep
            check_stamp(sweep_stamp, stamp, artifact="lambda sweep")
            sweep_minima = result.minima

        methods = []
        for head in heads:
            calibration = calibrations.get(head.label)
            if calibration is None:
                notes.append(f"no calibration stored for {head.label}")
            methods.append(summarize_method(head, calibration))

        truth = next((c.comparison.truth for c in calibrations.values() if c.comparison is not None), None)
        summary = ReportSummary(
            config_digest=stamp.config_digest,
            seed=stamp.seed,
            methods=methods,
            truth=truth,
            sweep_minima=sweep_minima,
            notes=notes,
        )
        written = self._store.save_summary(summary)
        logger.info("Report written: %s", ", ".join(written))
        return BuildReportResult(summary=summary, written=written)
