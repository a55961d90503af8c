# packages/core/phumobcal_core/use_cases/train_models.py
from __future__ import annotations

import logging
from dataclasses import dataclass

from phumobcal_core.pinn.models import AutoencoderModel
from phumobcal_core.pinn.training import AutoencoderRun, HeadRun, TrainConfig, train_autoencoder, train_head
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp, check_stamp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainModelsInput:
    training: TrainConfig
    stamp: RunStamp
    reuse_autoencoder: bool = True


@dataclass(frozen=True)
class TrainModelsResult:
    head: HeadRun
    autoencoder: AutoencoderRun | None  # None when a stored autoencoder was reused

    @property
    def label(self) -> str:
        return self.head.label


def with_master_seed(config: TrainConfig, stamp: RunStamp) -> TrainConfig:
    if config.seed is not None:
        return config
    return config.model_copy(update={"seed": stamp.seed})


class TrainModels:
    """
    Autoencoder then regression head on the stored dataset.

    A stored autoencoder with the same stamp is reused: its training does not depend
    on lambda, and training is deterministic, so retraining would reproduce it.
    """

    def __init__(self, *, store: ArtifactStore) -> None:
        self._store = store

    def execute(self, data: TrainModelsInput) -> TrainModelsResult:
        dataset, dataset_stamp = self._store.load_dataset()
        check_stamp(dataset_stamp, data.stamp, artifact="dataset")
        config = with_master_seed(data.training, data.stamp)

        ae_run: AutoencoderRun | None = None
        ae: AutoencoderModel | None = None
        if data.reuse_autoencoder and self._store.has_autoencoder():
            stored, ae_stamp = self._store.load_autoencoder()
            if ae_stamp == data.stamp:
                logger.info("Reusing stored autoencoder (config_digest=%s)", ae_stamp.config_digest[:12])
                ae = stored
            else:
                logger.info("Stored autoencoder belongs to another configuration; retraining")

        if ae is None:
            ae_run = train_autoencoder(dataset, config)
            self._store.save_autoencoder(ae_run, data.stamp)
            ae = ae_run.model

        head_run = train_head(ae, dataset, config)
        self._store.save_head(
            head_run,
            input_scaler=dataset.input_scaler,
            target_scaler=dataset.target_scaler,
            stamp=data.stamp,
        )
        logger.info(
            "Trained %s (lambda=%g): best epoch %d, violations %s",
            head_run.label,
            head_run.lambda_,
            head_run.best_epoch,
            head_run.violations,
        )
        return TrainModelsResult(head=head_run, autoencoder=ae_run)
