from pathlib import Path
import sys

import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.extend(
    [
        str(ROOT / "apps" / "cli"),
        str(ROOT / "packages" / "core"),
        str(ROOT / "packages" / "infra"),
    ]
)

from phumobcal_core.datagen.dataset import Dataset, build_dataset
from phumobcal_core.datagen.sampling import SamplingConfig
from phumobcal_core.domain.params import DeviceGeometry, ParamVector, PhuMobParams
from phumobcal_core.pinn.training import TrainConfig, train_autoencoder
from phumobcal_core.pinn.models import AutoencoderModel


def make_params(
    *,
    temperature: float = 300.0,
    workfunction: float = 5.2,
    mu_max: float = 153.0,
    mu_min: float = 55.0,
    n_ref: float = 10**17.4,
    alpha: float = 2.8,
    theta: float = 2.3,
) -> ParamVector:
    return ParamVector(
        temperature=temperature,
        workfunction=workfunction,
        phumob=PhuMobParams(mu_max=mu_max, mu_min=mu_min, n_ref=n_ref, alpha=alpha, theta=theta),
    )


TINY_TRAINING = TrainConfig(
    seed=11,
    max_epochs=3,
    ae_max_epochs=3,
    batch_size=16,
    patience=50,
    ae_patience=50,
    log_every=1,
)


@pytest.fixture(scope="session")
def tiny_dataset() -> Dataset:
    # 40 curves -> 28 train / 5 validation / 7 test
    return build_dataset(SamplingConfig(n_samples=40, seed=3), DeviceGeometry(), split_seed=4)


@pytest.fixture(scope="session")
def tiny_autoencoder(tiny_dataset: Dataset) -> AutoencoderModel:
    return train_autoencoder(tiny_dataset, TINY_TRAINING).model
