# packages/infra/phumobcal_infra/storage/memory.py
from __future__ import annotations

from phumobcal_core.calib.calibrate import CalibrationReport, TruthComparison
from phumobcal_core.calib.cohort import Cohort, CohortTruth
from phumobcal_core.calib.summary import ReportSummary, render_text
from phumobcal_core.datagen.dataset import Dataset
from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.pinn.models import AutoencoderModel
from phumobcal_core.pinn.sweep import SweepResult
from phumobcal_core.pinn.training import AutoencoderRun, HeadRun
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp, StoredCalibration, StoredHead
from phumobcal_core.shared.errors import MissingArtifactError


def _missing(name: str) -> MissingArtifactError:
    return MissingArtifactError(f"memory://{name}")


class InMemoryArtifactStore(ArtifactStore):
    """Keeps artifacts as live objects; used by use-case tests."""

    def __init__(self) -> None:
        self.dataset: tuple[Dataset, RunStamp] | None = None
        self.autoencoder: tuple[AutoencoderRun, RunStamp] | None = None
        self.heads: dict[str, StoredHead] = {}
        self.head_runs: dict[str, HeadRun] = {}
        self.sweep: tuple[SweepResult, RunStamp] | None = None
        self.cohort: tuple[Cohort, CohortTruth, RunStamp] | None = None
        self.calibrations: dict[str, StoredCalibration] = {}
        self.summaries: list[ReportSummary] = []
        self.summary_text: str | None = None

    def save_dataset(self, dataset: Dataset, stamp: RunStamp) -> None:
        self.dataset = (dataset, stamp)

    def load_dataset(self) -> tuple[Dataset, RunStamp]:
        if self.dataset is None:
            raise _missing("dataset")
        return self.dataset

    def save_autoencoder(self, run: AutoencoderRun, stamp: RunStamp) -> None:
        self.autoencoder = (run, stamp)

    def load_autoencoder(self) -> tuple[AutoencoderModel, RunStamp]:
        if self.autoencoder is None:
            raise _missing("models/autoencoder")
        run, stamp = self.autoencoder
        return run.model, stamp

    def has_autoencoder(self) -> bool:
        return self.autoencoder is not None

    def save_head(
        self, run: HeadRun, *, input_scaler: ScalerState, target_scaler: ScalerState, stamp: RunStamp
    ) -> None:
        self.head_runs[run.label] = run
        self.heads[run.label] = StoredHead(
            label=run.label,
            lambda_=run.lambda_,
            model=run.model,
            input_scaler=input_scaler,
            target_scaler=target_scaler,
            violations=dict(run.violations),
            stamp=stamp,
        )

    def load_head(self, label: str) -> StoredHead:
        if label not in self.heads:
            raise _missing(f"models/head_{label}")
        return self.heads[label]

    def list_heads(self) -> list[str]:
        return sorted(self.heads)

    def save_sweep(self, result: SweepResult, stamp: RunStamp) -> None:
        self.sweep = (result, stamp)

    def load_sweep(self) -> tuple[SweepResult, RunStamp] | None:
        return self.sweep

    def save_cohort(self, cohort: Cohort, truth: CohortTruth, stamp: RunStamp) -> None:
        self.cohort = (cohort, truth, stamp)

    def load_cohort(self) -> tuple[Cohort, RunStamp]:
        if self.cohort is None:
            raise _missing("cohort")
        cohort, _, stamp = self.cohort
        return cohort, stamp

    def load_truth(self) -> CohortTruth:
        if self.cohort is None:
            raise _missing("cohort/truth")
        return self.cohort[1]

    def save_calibration(
        self, report: CalibrationReport, comparison: TruthComparison | None, stamp: RunStamp
    ) -> None:
        self.calibrations[report.label] = StoredCalibration(report=report, comparison=comparison, stamp=stamp)

    def load_calibration(self, label: str) -> StoredCalibration:
        if label not in self.calibrations:
            raise _missing(f"calibration/{label}")
        return self.calibrations[label]

    def list_calibrations(self) -> list[str]:
        return sorted(self.calibrations)

    def save_summary(self, summary: ReportSummary) -> list[str]:
        self.summaries.append(summary)
        self.summary_text = render_text(summary)
        return ["memory://report/summary"]
