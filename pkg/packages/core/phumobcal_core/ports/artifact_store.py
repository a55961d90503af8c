# packages/core/phumobcal_core/ports/artifact_store.py
from __future__ import annotations

from dataclasses import dataclass

from phumobcal_core.calib.calibrate import CalibrationReport, TruthComparison
from phumobcal_core.calib.cohort import Cohort, CohortTruth
from phumobcal_core.calib.summary import ReportSummary
from phumobcal_core.datagen.dataset import Dataset
from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.pinn.models import AutoencoderModel, HeadModel
from phumobcal_core.pinn.sweep import SweepResult
from phumobcal_core.pinn.training import AutoencoderRun, HeadRun
from phumobcal_core.shared.errors import DigestMismatchError


@dataclass(frozen=True)
class RunStamp:
    """Embedded in every stored artifact."""

    config_digest: str
    seed: int


def check_stamp(found: RunStamp, expected: RunStamp, *, artifact: str) -> None:
    """Artifacts from another configuration or seed must not be combined."""
    if found != expected:
        raise DigestMismatchError(
            f"{artifact} was produced with config_digest={found.config_digest[:12]} seed={found.seed}, "
            f"current run has config_digest={expected.config_digest[:12]} seed={expected.seed}; "
            "re-run the upstream command with the current configuration"
        )


@dataclass(frozen=True)
class StoredHead:
    label: str
    lambda_: float
    model: HeadModel
    input_scaler: ScalerState
    target_scaler: ScalerState
    violations: dict[str, int]
    stamp: RunStamp


@dataclass(frozen=True)
class StoredCalibration:
    report: CalibrationReport
    comparison: TruthComparison | None
    stamp: RunStamp


class ArtifactStore:
    """
    Persistence for every pipeline artifact. `load_*` raises MissingArtifactError
    naming the expected location when the artifact does not exist.
    """

    def save_dataset(self, dataset: Dataset, stamp: RunStamp) -> None:
        raise NotImplementedError

    def load_dataset(self) -> tuple[Dataset, RunStamp]:
        raise NotImplementedError

    def save_autoencoder(self, run: AutoencoderRun, stamp: RunStamp) -> None:
        raise NotImplementedError

    def load_autoencoder(self) -> tuple[AutoencoderModel, RunStamp]:
        raise NotImplementedError

    def has_autoencoder(self) -> bool:
        raise NotImplementedError

    def save_head(
        self, run: HeadRun, *, input_scaler: ScalerState, target_scaler: ScalerState, stamp: RunStamp
    ) -> None:
        raise NotImplementedError

    def load_head(self, label: str) -> StoredHead:
        raise NotImplementedError

    def list_heads(self) -> list[str]:
        raise NotImplementedError

    def save_sweep(self, result: SweepResult, stamp: RunStamp) -> None:
        raise NotImplementedError

    def load_sweep(self) -> tuple[SweepResult, RunStamp] | None:
        """Optional artifact: None when no sweep was run."""
        raise NotImplementedError

    def save_cohort(self, cohort: Cohort, truth: CohortTruth, stamp: RunStamp) -> None:
        raise NotImplementedError

    def load_cohort(self) -> tuple[Cohort, RunStamp]:
        raise NotImplementedError

    def load_truth(self) -> CohortTruth:
        """Scoring only."""
        raise NotImplementedError

    def save_calibration(
        self, report: CalibrationReport, comparison: TruthComparison | None, stamp: RunStamp
    ) -> None:
        raise NotImplementedError

    def load_calibration(self, label: str) -> StoredCalibration:
        raise NotImplementedError

    def list_calibrations(self) -> list[str]:
        raise NotImplementedError

    def save_summary(self, summary: ReportSummary) -> list[str]:
        """Write the text summary and the box-plot artifacts; returns their locations."""
        raise NotImplementedError
