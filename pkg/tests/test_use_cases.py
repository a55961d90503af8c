import pytest

from conftest import TINY_TRAINING
from phumobcal_core.calib.cohort import CohortConfig
from phumobcal_core.datagen.sampling import SamplingConfig
from phumobcal_core.domain.params import DeviceGeometry
from phumobcal_core.pinn.sweep import SweepConfig
from phumobcal_core.ports.artifact_store import RunStamp, check_stamp
from phumobcal_core.shared.errors import DigestMismatchError, MissingArtifactError
from phumobcal_core.use_cases.build_report import BuildReport
from phumobcal_core.use_cases.calibrate_cohort import CalibrateCohort, CalibrateCohortInput
from phumobcal_core.use_cases.generate_dataset import GenerateDataset, GenerateDatasetInput
from phumobcal_core.use_cases.sweep_lambda import SweepLambda, SweepLambdaInput
from phumobcal_core.use_cases.train_models import TrainModels, TrainModelsInput, with_master_seed
from phumobcal_infra.storage.memory import InMemoryArtifactStore

STAMP = RunStamp(config_digest="a" * 64, seed=3)
OTHER = RunStamp(config_digest="b" * 64, seed=3)
TRAINING = TINY_TRAINING.model_copy(update={"seed": None})


def _generate(store: InMemoryArtifactStore, stamp: RunStamp = STAMP) -> None:
    GenerateDataset(store=store).execute(
        GenerateDatasetInput(sampling=SamplingConfig(n_samples=30), geometry=DeviceGeometry(), stamp=stamp)
    )


def test_check_stamp_rejects_other_configuration() -> None:
    check_stamp(STAMP, STAMP, artifact="dataset")
    with pytest.raises(DigestMismatchError):
        check_stamp(OTHER, STAMP, artifact="dataset")


def test_with_master_seed_only_fills_missing_seed() -> None:
    assert with_master_seed(TRAINING, STAMP).seed == 3
    assert with_master_seed(TRAINING.model_copy(update={"seed": 9}), STAMP).seed == 9


def test_generate_dataset_derives_seed_from_master() -> None:
    store = InMemoryArtifactStore()
    _generate(store)
    other = InMemoryArtifactStore()
    _generate(other)

    assert store.dataset is not None and other.dataset is not None
    dataset, stamp = store.dataset
    assert stamp == STAMP
    assert len(dataset) == 30
    assert dataset.sampling.seed != 0
    assert (dataset.currents() == other.dataset[0].currents()).all()


def test_train_requires_dataset() -> None:
    with pytest.raises(MissingArtifactError):
        TrainModels(store=InMemoryArtifactStore()).execute(TrainModelsInput(training=TRAINING, stamp=STAMP))


def test_train_rejects_dataset_from_other_configuration() -> None:
    store = InMemoryArtifactStore()
    _generate(store, OTHER)
    with pytest.raises(DigestMismatchError):
        TrainModels(store=store).execute(TrainModelsInput(training=TRAINING, stamp=STAMP))


def test_train_reuses_autoencoder_across_lambdas() -> None:
    store = InMemoryArtifactStore()
    _generate(store)
    train = TrainModels(store=store)

    first = train.execute(TrainModelsInput(training=TRAINING.with_lambda(0.0), stamp=STAMP))
    second = train.execute(TrainModelsInput(training=TRAINING, stamp=STAMP))

    assert first.autoencoder is not None
    assert second.autoencoder is None
    assert store.list_heads() == ["AE-NN", "AE-PINN"]
    assert store.load_head("AE-PINN").stamp == STAMP


def test_sweep_stores_rows() -> None:
    store = InMemoryArtifactStore()
    _generate(store)
    TrainModels(store=store).execute(TrainModelsInput(training=TRAINING, stamp=STAMP))

    result = SweepLambda(store=store).execute(
        SweepLambdaInput(training=TRAINING, sweep=SweepConfig(grid=(0.0, 0.1)), stamp=STAMP)
    )
    assert [r.lambda_ for r in result.rows] == [0.0, 0.1]
    assert store.load_sweep() == (result, STAMP)


def test_calibrate_needs_trained_models() -> None:
    store = InMemoryArtifactStore()
    with pytest.raises(MissingArtifactError):
        CalibrateCohort(store=store).execute(
            CalibrateCohortInput(cohort=CohortConfig(), geometry=DeviceGeometry(), stamp=STAMP)
        )


def test_calibrate_then_report() -> None:
    store = InMemoryArtifactStore()
    _generate(store)
    train = TrainModels(store=store)
    train.execute(TrainModelsInput(training=TRAINING.with_lambda(0.0), stamp=STAMP))
    train.execute(TrainModelsInput(training=TRAINING, stamp=STAMP))

    results = CalibrateCohort(store=store).execute(
        CalibrateCohortInput(cohort=CohortConfig(curves_per_group=2), geometry=DeviceGeometry(), stamp=STAMP)
    )
    assert [r.report.label for r in results] == ["AE-NN", "AE-PINN"]
    assert all(r.report.is_verified for r in results)
    assert all(r.comparison is not None for r in results)
    assert store.list_calibrations() == ["AE-NN", "AE-PINN"]

    report = BuildReport(store=store).execute(STAMP)
    assert [m.label for m in report.summary.methods] == ["AE-NN", "AE-PINN"]
    assert report.summary.truth is not None
    assert report.summary.truth["mu_max"] == 153.0
    assert store.summary_text is not None and "AE-NN" in store.summary_text


def test_report_refuses_mismatched_digest() -> None:
    store = InMemoryArtifactStore()
    _generate(store)
    TrainModels(store=store).execute(TrainModelsInput(training=TRAINING, stamp=STAMP))
    with pytest.raises(DigestMismatchError):
        BuildReport(store=store).execute(OTHER)


def test_report_without_heads_names_missing_artifact() -> None:
    with pytest.raises(MissingArtifactError):
        BuildReport(store=InMemoryArtifactStore()).execute(STAMP)
