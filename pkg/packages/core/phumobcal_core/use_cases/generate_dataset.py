# packages/core/phumobcal_core/use_cases/generate_dataset.py
from __future__ import annotations

from dataclasses import dataclass

from phumobcal_core.datagen.dataset import Dataset, build_dataset
from phumobcal_core.datagen.sampling import SamplingConfig
from phumobcal_core.domain.params import DeviceGeometry
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp
from phumobcal_core.shared.seeding import SeedStream, derive_seed


@dataclass(frozen=True)
class GenerateDatasetInput:
    sampling: SamplingConfig
    geometry: DeviceGeometry
    stamp: RunStamp
    n_jobs: int = 1


class GenerateDataset:
    """
    LHS draw, forward simulation, split assignment and scaler fitting, then persist.
    The sampling and split seeds are children of the run's master seed.
    """

    def __init__(self, *, store: ArtifactStore) -> None:
        self._store = store

    def execute(self, data: GenerateDatasetInput) -> Dataset:
        master = data.stamp.seed
        sampling = data.sampling.model_copy(update={"seed": derive_seed(master, SeedStream.SAMPLING)})
        dataset = build_dataset(
            sampling,
            data.geometry,
            split_seed=derive_seed(master, SeedStream.SPLITS),
            n_jobs=data.n_jobs,
        )
        self._store.save_dataset(dataset, data.stamp)
        return dataset
