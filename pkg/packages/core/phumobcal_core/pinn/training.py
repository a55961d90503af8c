# packages/core/phumobcal_core/pinn/training.py
from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from phumobcal_core.datagen.dataset import Dataset
from phumobcal_core.datagen.noise import NoiseDomain, add_noise_batch
from phumobcal_core.datagen.sampling import SplitTag
from phumobcal_core.datagen.scaling import ScalerState, inverse_transform, log_features, transform
from phumobcal_core.domain.curves import N_FEATURES, IVCurve
from phumobcal_core.domain.params import ParameterRanges, ParamVector
from phumobcal_core.nn.adam import AdamState, adam_step, init_adam
from phumobcal_core.nn.losses import mse
from phumobcal_core.nn.network import backward, forward, forward_train
from phumobcal_core.pinn.losses import (
    DEFAULT_PHYSICS_NORMALIZATION,
    HeadObjective,
    HybridObjective,
    LossBreakdown,
    violation_mask,
)
from phumobcal_core.pinn.models import AutoencoderModel, HeadModel, encode, init_autoencoder, init_head
from phumobcal_core.shared.errors import ConfigError, DimensionMismatchError, TrainingDivergenceError
from phumobcal_core.shared.seeding import SeedStream, derive_seed, make_rng

logger = logging.getLogger(__name__)

AE_NN_LABEL = "AE-NN"
AE_PINN_LABEL = "AE-PINN"


def method_label(lambda_: float) -> str:
    return AE_NN_LABEL if lambda_ == 0 else AE_PINN_LABEL


class TrainConfig(BaseModel):
    """
    Autoencoder and head training settings. `lambda` weights the physics penalty;
    `snr_db = None` trains on clean curves. `seed = None` inherits the run's master seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    lambda_: float = Field(default=0.02, ge=0, alias="lambda")
    snr_db: float | None = 35.0
    noise_domain: NoiseDomain = NoiseDomain.CURRENT
    seed: int | None = Field(default=None, ge=0)
    learning_rate: float = Field(default=1.0e-3, gt=0)
    batch_size: int = Field(default=64, ge=1)
    max_epochs: int = Field(default=2000, ge=0)
    patience: int = Field(default=50, ge=1)
    ae_max_epochs: int = Field(default=2000, ge=0)
    ae_patience: int = Field(default=50, ge=1)
    physics_normalization: float = Field(default=DEFAULT_PHYSICS_NORMALIZATION, gt=0)
    log_every: int = Field(default=50, ge=1)

    @property
    def effective_seed(self) -> int:
        """
        Raises:
            ConfigError: the seed was never resolved against a master seed.
        """
        if self.seed is None:
            raise ConfigError("training seed is unset; resolve it with the run's master seed before training")
        return self.seed

    def with_lambda(self, lambda_: float) -> TrainConfig:
        return self.model_copy(update={"lambda_": float(lambda_)})


@dataclass(frozen=True, slots=True)
class AutoencoderEpoch:
    epoch: int
    train_mse: float
    val_mse: float


@dataclass(frozen=True, slots=True)
class HeadEpoch:
    epoch: int
    train: LossBreakdown
    val: LossBreakdown


@dataclass
class AutoencoderRun:
    model: AutoencoderModel
    history: list[AutoencoderEpoch] = field(default_factory=list)
    best_epoch: int = 0


@dataclass
class HeadRun:
    model: HeadModel
    lambda_: float
    history: list[HeadEpoch] = field(default_factory=list)
    best_epoch: int = 0
    violations: dict[str, int] = field(default_factory=dict)
    final_val: LossBreakdown | None = None

    @property
    def label(self) -> str:
        return method_label(self.lambda_)


@dataclass(frozen=True)
class Prediction:
    params: ParamVector
    violation: bool
    out_of_range: tuple[str, ...] = ()


# --- helpers -----------------------------------------------------------------


def _noisy_features(
    currents: np.ndarray, input_scaler: ScalerState, config: TrainConfig, rng: np.random.Generator
) -> np.ndarray:
    if config.snr_db is None:
        noisy = currents
    else:
        noisy = add_noise_batch(currents, config.snr_db, rng, config.noise_domain)
    return transform(input_scaler, log_features(noisy))


def _monitor_split(dataset: Dataset) -> SplitTag:
    if dataset.indices(SplitTag.VALIDATION).size:
        return SplitTag.VALIDATION
    logger.warning("Dataset has no validation split; monitoring on the training split")
    return SplitTag.TRAIN


def _batches(n_rows: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n_rows)
    return [order[start : start + batch_size] for start in range(0, n_rows, batch_size)]


def _check_finite(value: float, *, epoch: int, what: str, lambda_: float | None = None) -> None:
    if not math.isfinite(value):
        suffix = "" if lambda_ is None else f" (lambda={lambda_:g})"
        raise TrainingDivergenceError(f"{what} loss is {value} at epoch {epoch}{suffix}", epoch=epoch, lambda_=lambda_)


# --- autoencoder ---------------------------------------------------------------


def train_autoencoder(dataset: Dataset, config: TrainConfig) -> AutoencoderRun:
    """
    Denoising reconstruction: each epoch re-draws the noise on the training curves,
    the network sees the noisy scaled log-currents and is scored against the clean
    ones. Early stopping restores the best validation epoch.
    """
    seed = derive_seed(config.effective_seed, SeedStream.AUTOENCODER)
    model = init_autoencoder(make_rng(seed, 0))
    enc_opt = init_adam(model.encoder, config.learning_rate)
    dec_opt = init_adam(model.decoder, config.learning_rate)

    train_currents = dataset.currents(SplitTag.TRAIN)
    clean_train = dataset.scaled_features(SplitTag.TRAIN)
    clean_val = dataset.scaled_features(_monitor_split(dataset))

    run = AutoencoderRun(model=model.copy())
    best_val = math.inf
    for epoch in range(1, config.ae_max_epochs + 1):
        rng = make_rng(seed, epoch)
        noisy = _noisy_features(train_currents, dataset.input_scaler, config, rng)

        train_sum = 0.0
        for rows in _batches(len(noisy), config.batch_size, rng):
            latent, enc_cache = forward_train(model.encoder, noisy[rows])
            recon, dec_cache = forward_train(model.decoder, latent)
            loss, grad = mse(recon, clean_train[rows])
            dec_grads = backward(model.decoder, dec_cache, grad)
            enc_grads = backward(model.encoder, enc_cache, dec_grads.inputs)
            adam_step(model.decoder, dec_opt, dec_grads)
            adam_step(model.encoder, enc_opt, enc_grads)
            train_sum += loss * len(rows)

        train_mse = train_sum / len(noisy)
        val_mse, _ = mse(forward(model.decoder, forward(model.encoder, clean_val)), clean_val)
        _check_finite(val_mse, epoch=epoch, what="autoencoder validation")
        run.history.append(AutoencoderEpoch(epoch=epoch, train_mse=train_mse, val_mse=val_mse))

        if val_mse < best_val:
            best_val = val_mse
            run.model = model.copy()
            run.best_epoch = epoch
        if epoch % config.log_every == 0:
            logger.info("AE epoch %d train_mse=%.4e val_mse=%.4e", epoch, train_mse, val_mse)
        if epoch - run.best_epoch >= config.ae_patience:
            logger.info("AE early stop at epoch %d (best %d, val_mse=%.4e)", epoch, run.best_epoch, best_val)
            break

    return run


# --- regression head -------------------------------------------------------------


def _evaluate(head: HeadModel, latent: np.ndarray, targets: np.ndarray, objective: HeadObjective) -> LossBreakdown:
    breakdown, _ = objective.evaluate(forward(head.network, latent), targets)
    return breakdown


def fit_head(
    ae: AutoencoderModel,
    dataset: Dataset,
    config: TrainConfig,
    *,
    objective: HeadObjective,
    on_epoch: Callable[[HeadEpoch], None] | None = None,
) -> HeadRun:
    """
    Train a regression head on (latent, scaled target) pairs under `objective`.
    The autoencoder stays frozen; only the noise draw reaches it each epoch.
    """
    seed = derive_seed(config.effective_seed, SeedStream.HEAD)
    head = init_head(make_rng(seed, 0))
    opt: AdamState = init_adam(head.network, config.learning_rate)
    lambda_ = objective.lambda_

    train_currents = dataset.currents(SplitTag.TRAIN)
    train_targets = dataset.scaled_targets(SplitTag.TRAIN)
    monitor = _monitor_split(dataset)
    val_latent = encode(ae, dataset.scaled_features(monitor))
    val_targets = dataset.scaled_targets(monitor)

    run = HeadRun(model=head.copy(), lambda_=lambda_)
    best_val = math.inf
    for epoch in range(1, config.max_epochs + 1):
        rng = make_rng(seed, epoch)
        latent = encode(ae, _noisy_features(train_currents, dataset.input_scaler, config, rng))

        mse_sum = 0.0
        phy_sum = 0.0
        for rows in _batches(len(latent), config.batch_size, rng):
            pred, cache = forward_train(head.network, latent[rows])
            breakdown, grad = objective.evaluate(pred, train_targets[rows])
            adam_step(head.network, opt, backward(head.network, cache, grad))
            mse_sum += breakdown.mse * len(rows)
            phy_sum += breakdown.phy * len(rows)

        n_rows = len(latent)
        train = LossBreakdown.combine(mse=mse_sum / n_rows, phy=phy_sum / n_rows, lambda_=lambda_)
        val = _evaluate(head, val_latent, val_targets, objective)
        _check_finite(val.total, epoch=epoch, what="head validation", lambda_=lambda_)
        row = HeadEpoch(epoch=epoch, train=train, val=val)
        run.history.append(row)
        if on_epoch is not None:
            on_epoch(row)

        if val.total < best_val:
            best_val = val.total
            run.model = head.copy()
            run.best_epoch = epoch
        if epoch % config.log_every == 0:
            logger.info(
                "Head[lambda=%g] epoch %d train_total=%.4e val_total=%.4e val_mse=%.4e val_phy=%.4e",
                lambda_,
                epoch,
                train.total,
                val.total,
                val.mse,
                val.phy,
            )
        if epoch - run.best_epoch >= config.patience:
            logger.info("Head[lambda=%g] early stop at epoch %d (best %d)", lambda_, epoch, run.best_epoch)
            break

    run.final_val = _evaluate(run.model, val_latent, val_targets, objective)
    run.violations = split_violations(ae, run.model, dataset)
    return run


def train_head(ae: AutoencoderModel, dataset: Dataset, config: TrainConfig) -> HeadRun:
    """lambda * L_PHY + L_MSE. lambda = 0 is the plain AE-NN baseline."""
    objective = HybridObjective(
        lambda_=config.lambda_,
        target_scaler=dataset.target_scaler,
        normalization=config.physics_normalization,
    )
    return fit_head(ae, dataset, config, objective=objective)


# --- prediction ----------------------------------------------------------------


def predict_targets(
    ae: AutoencoderModel,
    head: HeadModel,
    currents: np.ndarray,
    *,
    input_scaler: ScalerState,
    target_scaler: ScalerState,
) -> np.ndarray:
    """(curves x 51) currents -> (curves x 7) physical-unit targets."""
    rows = np.atleast_2d(np.asarray(currents, dtype=np.float64))
    if rows.shape[1] != N_FEATURES:
        raise DimensionMismatchError(f"expected {N_FEATURES} currents per curve, got {rows.shape[1]}")
    latent = encode(ae, transform(input_scaler, log_features(rows)))
    return inverse_transform(target_scaler, forward(head.network, latent))


def predict_params(
    ae: AutoencoderModel,
    head: HeadModel,
    curve: IVCurve,
    *,
    input_scaler: ScalerState,
    target_scaler: ScalerState,
    ranges: ParameterRanges | None = None,
) -> Prediction:
    targets = predict_targets(ae, head, curve.currents, input_scaler=input_scaler, target_scaler=target_scaler)[0]
    params = ParamVector.from_targets(targets)
    outside = params.out_of_range(ranges) if ranges is not None else ()
    return Prediction(params=params, violation=bool(violation_mask(targets)[0]), out_of_range=outside)


def split_violations(ae: AutoencoderModel, head: HeadModel, dataset: Dataset) -> dict[str, int]:
    """Violating predictions on the clean training and test curves."""
    counts: dict[str, int] = {}
    for split in (SplitTag.TRAIN, SplitTag.TEST):
        currents = dataset.currents(split)
        if currents.size == 0:
            counts[split.value] = 0
            continue
        targets = predict_targets(
            ae, head, currents, input_scaler=dataset.input_scaler, target_scaler=dataset.target_scaler
        )
        counts[split.value] = int(np.count_nonzero(violation_mask(targets)))
    return counts
