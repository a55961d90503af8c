import logging

import numpy as np
import pytest

from conftest import TINY_TRAINING
from phumobcal_core.datagen.dataset import Dataset, DatasetRecord, build_dataset
from phumobcal_core.datagen.sampling import SamplingConfig, SplitTag
from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.domain.params import DeviceGeometry, ParamVector
from phumobcal_core.nn.network import backward, forward_train, mlp
from phumobcal_core.pinn.losses import (
    DEFAULT_PHYSICS_NORMALIZATION,
    HybridObjective,
    LossBreakdown,
    MseObjective,
    physics_loss,
    physics_loss_grad,
    violation_mask,
)
from phumobcal_core.pinn.models import AutoencoderModel, HEAD_DIMS, init_head, reconstruct
from phumobcal_core.pinn.sweep import DEFAULT_GRID, SweepConfig, local_minima, sweep_lambda
from phumobcal_core.pinn.training import (
    AE_NN_LABEL,
    AE_PINN_LABEL,
    HeadEpoch,
    TrainConfig,
    fit_head,
    method_label,
    predict_params,
    train_autoencoder,
    train_head,
)
from phumobcal_core.shared.errors import ConfigError, DomainError
from phumobcal_core.shared.seeding import SeedStream, derive_seed, make_rng

IDENTITY_SCALER = ScalerState.from_dict({"kind": "minmax", "min": [0.0] * 7, "max": [1.0] * 7})
TARGET_SCALER = ScalerState.from_dict(
    {
        "kind": "minmax",
        "min": [200.0, 5.0, 22.0, 20.0, 17.0, 1.0, 0.5],
        "max": [500.0, 5.5, 2000.0, 1810.0, 18.0, 5.0, 5.0],
    }
)


def _row(mu_max: float, mu_min: float) -> list[float]:
    return [300.0, 5.2, mu_max, mu_min, 17.4, 2.8, 2.3]


def test_physics_normalization_is_mu_max_range_width() -> None:
    assert DEFAULT_PHYSICS_NORMALIZATION == pytest.approx(1978.0)


def test_physics_loss_is_zero_for_ordered_mobilities() -> None:
    assert physics_loss(np.array([_row(153.0, 55.0)]), IDENTITY_SCALER) == 0.0


def test_physics_loss_penalizes_inverted_mobilities() -> None:
    assert physics_loss(np.array([_row(90.0, 100.0)]), IDENTITY_SCALER) == pytest.approx(10.0 / 1978.0)


def test_physics_loss_is_a_batch_mean() -> None:
    batch = np.array([_row(90.0, 100.0), _row(153.0, 55.0)])
    assert physics_loss(batch, IDENTITY_SCALER) == pytest.approx(5.0 / 1978.0)


def test_physics_loss_has_zero_subgradient_at_equality() -> None:
    value, grad = physics_loss_grad(np.array([_row(100.0, 100.0)]), IDENTITY_SCALER)
    assert value == 0.0
    assert np.all(grad == 0.0)


def test_violation_mask_counts_equality() -> None:
    rows = np.array([_row(100.0, 100.0), _row(90.0, 100.0), _row(153.0, 55.0)])
    assert violation_mask(rows).tolist() == [True, True, False]


def test_hybrid_gradient_matches_finite_differences() -> None:
    rng = np.random.default_rng(0)
    predicted = rng.uniform(0.1, 0.9, size=(5, 7))
    predicted[:2, 2] = 0.05  # mu_max low
    predicted[:2, 3] = 0.8  # mu_min high: the first two rows violate
    target = rng.uniform(0.0, 1.0, size=(5, 7))
    objective = HybridObjective(lambda_=0.5, target_scaler=TARGET_SCALER)

    breakdown, grad = objective.evaluate(predicted, target)
    assert breakdown.phy > 0

    h = 1e-6
    for i in range(predicted.shape[0]):
        for j in range(predicted.shape[1]):
            up = predicted.copy()
            up[i, j] += h
            down = predicted.copy()
            down[i, j] -= h
            numeric = (objective.evaluate(up, target)[0].total - objective.evaluate(down, target)[0].total) / (2 * h)
            assert grad[i, j] == pytest.approx(numeric, rel=1e-5, abs=1e-8)


def test_hybrid_total_is_weighted_sum() -> None:
    predicted = np.array([[0.5, 0.5, 0.05, 0.8, 0.5, 0.5, 0.5]])
    target = np.full((1, 7), 0.4)
    breakdown, _ = HybridObjective(lambda_=0.1, target_scaler=TARGET_SCALER).evaluate(predicted, target)
    assert breakdown.total == pytest.approx(0.1 * breakdown.phy + breakdown.mse)
    assert LossBreakdown.combine(mse=1.0, phy=2.0, lambda_=0.5).total == 2.0


def test_method_labels() -> None:
    assert method_label(0.0) == AE_NN_LABEL
    assert method_label(0.02) == AE_PINN_LABEL


def test_train_config_accepts_lambda_alias() -> None:
    config = TrainConfig.model_validate({"lambda": 0.1})
    assert config.lambda_ == 0.1
    assert config.with_lambda(0.0).lambda_ == 0.0
    with pytest.raises(ValueError):
        TrainConfig.model_validate({"lambda": -0.1})


def test_autoencoder_training_records_history(tiny_dataset: Dataset) -> None:
    run = train_autoencoder(tiny_dataset, TINY_TRAINING)
    assert 1 <= len(run.history) <= 3
    assert 1 <= run.best_epoch <= len(run.history)
    best = min(run.history, key=lambda h: h.val_mse)
    assert best.epoch == run.best_epoch
    assert reconstruct(run.model, tiny_dataset.scaled_features(SplitTag.TEST)).shape == (7, 51)


def test_autoencoder_training_is_deterministic(tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel) -> None:
    again = train_autoencoder(tiny_dataset, TINY_TRAINING)
    assert again.model.same_as(tiny_autoencoder)


def test_zero_lambda_matches_plain_mse_bitwise(tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel) -> None:
    config = TINY_TRAINING.with_lambda(0.0)
    hybrid = train_head(tiny_autoencoder, tiny_dataset, config)
    plain = fit_head(tiny_autoencoder, tiny_dataset, config, objective=MseObjective())

    assert hybrid.model.network.same_as(plain.model.network)
    assert [h.val.mse for h in hybrid.history] == [h.val.mse for h in plain.history]
    assert hybrid.label == AE_NN_LABEL


def test_zero_epochs_returns_initial_head(tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel) -> None:
    config = TINY_TRAINING.model_copy(update={"max_epochs": 0})
    run = train_head(tiny_autoencoder, tiny_dataset, config)
    expected = init_head(make_rng(derive_seed(config.effective_seed, SeedStream.HEAD), 0))

    assert run.history == []
    assert run.best_epoch == 0
    assert run.model.network.same_as(expected.network)
    assert run.final_val is not None


def test_head_training_is_deterministic_and_additive(
    tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel
) -> None:
    seen: list[HeadEpoch] = []
    objective = HybridObjective(lambda_=0.02, target_scaler=tiny_dataset.target_scaler)
    first = fit_head(tiny_autoencoder, tiny_dataset, TINY_TRAINING, objective=objective, on_epoch=seen.append)
    second = train_head(tiny_autoencoder, tiny_dataset, TINY_TRAINING)

    assert first.model.network.same_as(second.model.network)
    assert len(seen) == len(first.history) == 3
    for row in first.history:
        assert row.val.total == pytest.approx(0.02 * row.val.phy + row.val.mse)
        assert row.train.total == pytest.approx(0.02 * row.train.phy + row.train.mse)
    assert set(first.violations) == {"train", "test"}
    assert first.model.network.layer_dims == HEAD_DIMS


def test_predict_params_flags_violations(tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel) -> None:
    run = train_head(tiny_autoencoder, tiny_dataset, TINY_TRAINING)
    record = tiny_dataset.records[0]
    prediction = predict_params(
        tiny_autoencoder,
        run.model,
        record.curve,
        input_scaler=tiny_dataset.input_scaler,
        target_scaler=tiny_dataset.target_scaler,
        ranges=tiny_dataset.sampling.ranges,
    )
    assert isinstance(prediction.params, ParamVector)
    assert prediction.violation == (prediction.params.phumob.mu_min >= prediction.params.phumob.mu_max)


def test_missing_validation_split_falls_back_to_training(
    tiny_autoencoder: AutoencoderModel, caplog: pytest.LogCaptureFixture
) -> None:
    dataset = build_dataset(
        SamplingConfig(n_samples=20, seed=8, split_fractions=(0.8, 0.0, 0.2)), DeviceGeometry(), split_seed=2
    )
    assert dataset.split_sizes()["validation"] == 0
    with caplog.at_level(logging.WARNING):
        run = train_head(tiny_autoencoder, dataset, TINY_TRAINING.model_copy(update={"max_epochs": 1}))
    assert len(run.history) == 1
    assert "no validation split" in caplog.text


@pytest.mark.parametrize(
    "values, expected",
    [
        ([3.0, 1.0, 2.0, 0.5, 4.0], [1, 3]),
        ([1.0, 2.0, 3.0], [0]),
        ([3.0, 2.0, 1.0], [2]),
        ([2.0, 2.0], []),
        ([7.0], [0]),
    ],
)
def test_local_minima(values: list[float], expected: list[int]) -> None:
    assert local_minima(values) == expected


def test_default_grid() -> None:
    assert len(DEFAULT_GRID) == 11
    assert DEFAULT_GRID[0] == 0.0
    assert DEFAULT_GRID[-1] == pytest.approx(0.2)


@pytest.mark.parametrize("grid", [(), (0.1, 0.0), (-0.1, 0.0), (0.0, 0.0)])
def test_sweep_rejects_invalid_grids(
    grid: tuple[float, ...], tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel
) -> None:
    with pytest.raises(DomainError):
        sweep_lambda(tiny_autoencoder, tiny_dataset, grid, TINY_TRAINING)


def test_sweep_config_validation() -> None:
    with pytest.raises(ValueError):
        SweepConfig(grid=(0.2, 0.1))


def test_single_lambda_sweep_matches_direct_training(
    tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel
) -> None:
    result = sweep_lambda(tiny_autoencoder, tiny_dataset, (0.0,), TINY_TRAINING)
    direct = train_head(tiny_autoencoder, tiny_dataset, TINY_TRAINING.with_lambda(0.0))

    assert len(result.rows) == 1
    assert result.minima == [0.0]
    assert direct.final_val is not None
    assert result.rows[0].val_total == direct.final_val.total
    assert result.rows[0].label == AE_NN_LABEL


def test_sweep_is_deterministic_and_warns_without_baseline(
    tiny_dataset: Dataset, tiny_autoencoder: AutoencoderModel, caplog: pytest.LogCaptureFixture
) -> None:
    with caplog.at_level(logging.WARNING):
        first = sweep_lambda(tiny_autoencoder, tiny_dataset, (0.05, 0.1), TINY_TRAINING)
    second = sweep_lambda(tiny_autoencoder, tiny_dataset, SweepConfig(grid=(0.05, 0.1)), TINY_TRAINING)

    assert [r.lambda_ for r in first.rows] == [0.05, 0.1]
    assert first.rows == second.rows
    assert "no 0 entry" in caplog.text


def _hybrid_total(model, x: np.ndarray, target: np.ndarray, objective: HybridObjective) -> tuple[float, list]:
    """Loss value plus the ReLU and hinge activity pattern it was computed under."""
    out, cache = forward_train(model, x)
    pattern = [z > 0 for z in cache.pre_activations[:-1]]
    pattern.append(physics_loss_grad(out, objective.target_scaler)[1] != 0)
    return objective.evaluate(out, target)[0].total, pattern


def test_hybrid_loss_gradients_on_random_networks() -> None:
    objective = HybridObjective(lambda_=0.5, target_scaler=TARGET_SCALER)
    h = 1e-6
    checked = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        hidden = [int(d) for d in rng.integers(2, 17, size=int(rng.integers(1, 4)))]
        model = mlp((int(rng.integers(2, 17)), *hidden, 7), rng)
        x = rng.normal(size=(6, model.input_dim))
        target = rng.uniform(0.0, 1.0, size=(6, 7))

        out, cache = forward_train(model, x)
        _, grad_out = objective.evaluate(out, target)
        grads = backward(model, cache, grad_out)
        _, pattern = _hybrid_total(model, x, target, objective)

        for layer in range(model.n_layers):
            pairs = ((model.weights[layer], grads.weights[layer]), (model.biases[layer], grads.biases[layer]))
            for params, analytic in pairs:
                flat = params.reshape(-1)
                for k in rng.choice(flat.size, size=min(flat.size, 6), replace=False):
                    original = flat[k]
                    flat[k] = original + h
                    plus, plus_pattern = _hybrid_total(model, x, target, objective)
                    flat[k] = original - h
                    minus, minus_pattern = _hybrid_total(model, x, target, objective)
                    flat[k] = original
                    same = (plus_pattern, minus_pattern)
                    if not all(np.array_equal(a, b) for p in same for a, b in zip(p, pattern, strict=True)):
                        continue  # the step crossed a kink
                    checked += 1
                    numeric = (plus - minus) / (2 * h)
                    assert analytic.reshape(-1)[k] == pytest.approx(numeric, rel=1e-5, abs=1e-7), (seed, layer, k)
    assert checked > 200


def test_training_without_a_resolved_seed_is_rejected(tiny_dataset: Dataset) -> None:
    config = TINY_TRAINING.model_copy(update={"seed": None})
    with pytest.raises(ConfigError):
        train_autoencoder(tiny_dataset, config)


def test_autoencoder_memorises_a_single_curve(tiny_dataset: Dataset) -> None:
    record = tiny_dataset.records[0]
    single = Dataset(
        records=[DatasetRecord(curve=record.curve, params=record.params, split=SplitTag.TRAIN)],
        input_scaler=tiny_dataset.input_scaler,
        target_scaler=tiny_dataset.target_scaler,
        sampling=tiny_dataset.sampling,
        geometry=tiny_dataset.geometry,
    )
    config = TINY_TRAINING.model_copy(
        update={
            "snr_db": None,
            "batch_size": 1,
            "learning_rate": 3e-4,
            "ae_max_epochs": 4000,
            "ae_patience": 4000,
            "log_every": 1000,
        }
    )
    run = train_autoencoder(single, config)

    features = single.scaled_features(SplitTag.TRAIN)
    error = reconstruct(run.model, features) - features
    assert float(np.mean(error * error)) < 1e-4


def test_large_lambda_clears_training_violations(tiny_autoencoder: AutoencoderModel) -> None:
    dataset = build_dataset(
        SamplingConfig(n_samples=12, seed=3, split_fractions=(1.0, 0.0, 0.0)), DeviceGeometry(), split_seed=4
    )
    config = TINY_TRAINING.model_copy(
        update={"lambda_": 1e3, "snr_db": None, "batch_size": 64, "max_epochs": 400, "patience": 400, "log_every": 100}
    )
    run = train_head(tiny_autoencoder, dataset, config)

    assert run.violations == {"train": 0, "test": 0}
    assert run.history[run.best_epoch - 1].val.phy == 0.0


@pytest.mark.slow
def test_physics_penalty_does_not_add_test_violations_across_seeds() -> None:
    dataset = build_dataset(SamplingConfig(n_samples=2000, seed=1), DeviceGeometry(), split_seed=2, n_jobs=4)
    base = TrainConfig(seed=0, max_epochs=300, ae_max_epochs=300, log_every=100)
    ae = train_autoencoder(dataset, base).model

    counts: dict[float, list[int]] = {0.0: [], 0.02: []}
    for seed in range(5):
        for lambda_ in counts:
            run = train_head(ae, dataset, base.model_copy(update={"seed": seed, "lambda_": lambda_}))
            counts[lambda_].append(run.violations["test"])

    assert np.median(counts[0.02]) <= np.median(counts[0.0])
