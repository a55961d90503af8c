# packages/core/phumobcal_core/use_cases/sweep_lambda.py
from __future__ import annotations

from dataclasses import dataclass

from phumobcal_core.pinn.sweep import SweepConfig, SweepResult, sweep_lambda
from phumobcal_core.pinn.training import TrainConfig
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp, check_stamp
from phumobcal_core.use_cases.train_models import with_master_seed


@dataclass(frozen=True)
class SweepLambdaInput:
    training: TrainConfig
    sweep: SweepConfig
    stamp: RunStamp
    n_jobs: int = 1


class SweepLambda:
    def __init__(self, *, store: ArtifactStore) -> None:
        self._store = store

    def execute(self, data: SweepLambdaInput) -> SweepResult:
        dataset, dataset_stamp = self._store.load_dataset()
        check_stamp(dataset_stamp, data.stamp, artifact="dataset")
        ae, ae_stamp = self._store.load_autoencoder()
        check_stamp(ae_stamp, data.stamp, artifact="autoencoder")

        config = with_master_seed(data.training, data.stamp)
        result = sweep_lambda(ae, dataset, data.sweep, config, n_jobs=data.n_jobs)
        self._store.save_sweep(result, data.stamp)
        return result
