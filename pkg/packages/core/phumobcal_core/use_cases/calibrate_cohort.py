# packages/core/phumobcal_core/use_cases/calibrate_cohort.py
from __future__ import annotations

import logging
from dataclasses import dataclass

from phumobcal_core.calib.calibrate import calibrate, compare_with_truth, verify
from phumobcal_core.calib.cohort import CohortConfig, generate_cohort
from phumobcal_core.domain.params import DeviceGeometry
from phumobcal_core.pinn.training import AE_PINN_LABEL
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp, StoredCalibration, check_stamp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrateCohortInput:
    cohort: CohortConfig
    geometry: DeviceGeometry
    stamp: RunStamp
    n_jobs: int = 1


class CalibrateCohort:
    """
    Generate the pseudo-experimental cohort, then for every stored head: predict,
    average, re-simulate on the nominal geometry and score.

    The hidden truth is only handed to `compare_with_truth`, after verification.
    """

    def __init__(self, *, store: ArtifactStore) -> None:
        self._store = store

    def execute(self, data: CalibrateCohortInput) -> list[StoredCalibration]:
        ae, ae_stamp = self._store.load_autoencoder()
        check_stamp(ae_stamp, data.stamp, artifact="autoencoder")
        labels = self._store.list_heads() or [AE_PINN_LABEL]
        heads = [self._store.load_head(label) for label in labels]
        for head in heads:
            check_stamp(head.stamp, data.stamp, artifact=f"head {head.label}")

        cohort, truth = generate_cohort(data.cohort, data.geometry, seed=data.stamp.seed)
        self._store.save_cohort(cohort, truth, data.stamp)

        results: list[StoredCalibration] = []
        for head in heads:
            report = calibrate(
                ae,
                head.model,
                cohort,
                input_scaler=head.input_scaler,
                target_scaler=head.target_scaler,
                lambda_=head.lambda_,
            )
            report = verify(report, cohort, data.geometry, n_jobs=data.n_jobs)
            comparison = compare_with_truth(report, truth)
            self._store.save_calibration(report, comparison, data.stamp)
            results.append(StoredCalibration(report=report, comparison=comparison, stamp=data.stamp))
        return results
