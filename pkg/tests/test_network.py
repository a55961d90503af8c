import json

import numpy as np
import pytest

from phumobcal_core.datagen.scaling import ScalerKind, fit_scaler
from phumobcal_core.nn.adam import adam_step, init_adam
from phumobcal_core.nn.checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint
from phumobcal_core.nn.losses import mse
from phumobcal_core.nn.network import Gradients, backward, forward, forward_train, mlp
from phumobcal_core.shared.errors import CheckpointFormatError, DimensionMismatchError, StaleCacheError


def _loss(model, x: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(forward(model, x) * weights))


def test_backward_matches_finite_differences() -> None:
    rng = np.random.default_rng(0)
    model = mlp((4, 6, 5, 3), rng)
    x = rng.normal(size=(7, 4))
    upstream = rng.normal(size=(7, 3))

    _, cache = forward_train(model, x)
    grads = backward(model, cache, upstream)

    h = 1e-6
    for layer in range(model.n_layers):
        pairs = ((model.weights[layer], grads.weights[layer]), (model.biases[layer], grads.biases[layer]))
        for params, analytic in pairs:
            flat = params.reshape(-1)
            for k in range(0, flat.size, max(1, flat.size // 5)):
                original = flat[k]
                flat[k] = original + h
                plus = _loss(model, x, upstream)
                flat[k] = original - h
                minus = _loss(model, x, upstream)
                flat[k] = original
                assert analytic.reshape(-1)[k] == pytest.approx((plus - minus) / (2 * h), rel=1e-5, abs=1e-7)


def test_backward_input_gradient_matches_finite_differences() -> None:
    rng = np.random.default_rng(1)
    model = mlp((3, 8, 2), rng)
    x = rng.normal(size=(1, 3))
    upstream = np.array([[1.0, -2.0]])

    _, cache = forward_train(model, x)
    grads = backward(model, cache, upstream)

    h = 1e-6
    for j in range(3):
        bumped = x.copy()
        bumped[0, j] += h
        lowered = x.copy()
        lowered[0, j] -= h
        numeric = (_loss(model, bumped, upstream) - _loss(model, lowered, upstream)) / (2 * h)
        assert grads.inputs[0, j] == pytest.approx(numeric, rel=1e-5, abs=1e-8)


def test_forward_accepts_single_row() -> None:
    model = mlp((3, 4, 2), np.random.default_rng(2))
    x = np.array([0.1, -0.2, 0.3])
    assert forward(model, x).shape == (2,)
    assert np.array_equal(forward(model, x), forward(model, x[None, :])[0])


def test_forward_rejects_wrong_width() -> None:
    model = mlp((3, 4, 2), np.random.default_rng(2))
    with pytest.raises(DimensionMismatchError):
        forward(model, np.zeros((2, 4)))


def test_stale_cache_is_rejected_after_update() -> None:
    model = mlp((2, 3, 1), np.random.default_rng(3))
    x = np.ones((4, 2))
    out, cache = forward_train(model, x)
    grads = backward(model, cache, np.ones_like(out))
    adam_step(model, init_adam(model), grads)
    with pytest.raises(StaleCacheError):
        backward(model, cache, np.ones_like(out))


def test_first_adam_step_moves_by_learning_rate_against_gradient_sign() -> None:
    model = mlp((2, 2), np.random.default_rng(4))
    before = [w.copy() for w in model.weights]
    grads = Gradients(
        weights=[np.array([[0.5, -3.0], [2.0, -0.01]])],
        biases=[np.array([1.0, -1.0])],
        inputs=np.zeros((1, 2)),
    )
    state = init_adam(model, learning_rate=1e-3)
    adam_step(model, state, grads)

    assert state.step == 1
    assert model.weights[0] - before[0] == pytest.approx(-1e-3 * np.sign(grads.weights[0]), rel=1e-4)
    assert model.biases[0] == pytest.approx([-1e-3, 1e-3], rel=1e-4)


def test_mse_value_and_gradient() -> None:
    value, grad = mse(np.array([[1.0, 2.0]]), np.array([[0.0, 4.0]]))
    assert value == pytest.approx(2.5)
    assert grad == pytest.approx([[1.0, -2.0]])


def _checkpoint() -> Checkpoint:
    rng = np.random.default_rng(5)
    return Checkpoint(
        kind="head",
        networks={"head": mlp((3, 4, 2), rng)},
        seed=42,
        config_digest="abc123",
        scalers={"target": fit_scaler(ScalerKind.MINMAX, rng.normal(size=(6, 2)))},
        metadata={"lambda": 0.02},
    )


def test_checkpoint_round_trip_is_byte_identical() -> None:
    ckpt = _checkpoint()
    text = encode_checkpoint(ckpt)
    decoded = decode_checkpoint(text)

    assert encode_checkpoint(decoded) == text
    assert decoded.networks["head"].same_as(ckpt.networks["head"])
    assert decoded.scalers["target"].same_as(ckpt.scalers["target"])
    assert decoded.seed == 42
    assert decoded.config_digest == "abc123"


def test_checkpoint_with_tampered_dims_is_rejected() -> None:
    document = json.loads(encode_checkpoint(_checkpoint()))
    document["networks"]["head"]["layer_dims"] = [3, 5, 2]
    with pytest.raises(CheckpointFormatError):
        decode_checkpoint(json.dumps(document))


def test_checkpoint_with_other_format_version_is_rejected() -> None:
    document = json.loads(encode_checkpoint(_checkpoint()))
    document["format_version"] = 99
    with pytest.raises(CheckpointFormatError):
        decode_checkpoint(json.dumps(document))


def test_checkpoint_rejects_malformed_json() -> None:
    with pytest.raises(CheckpointFormatError):
        decode_checkpoint("{not json")


def _scripted_adam(theta: float, grads: list[float], lr: float) -> float:
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        m_hat = m / (1 - 0.9**t)
        v_hat = v / (1 - 0.999**t)
        theta -= lr * m_hat / (v_hat**0.5 + 1e-8)
    return theta


def test_two_adam_steps_match_scripted_update() -> None:
    model = mlp((2, 2), np.random.default_rng(6))
    start_w, start_b = model.weights[0].copy(), model.biases[0].copy()
    script = [
        (np.array([[0.3, -1.2], [2.5, 0.0]]), np.array([0.7, -0.05])),
        (np.array([[-0.4, -1.0], [1.5, 3.0]]), np.array([0.2, 0.4])),
    ]
    state = init_adam(model, learning_rate=0.01)
    for gw, gb in script:
        adam_step(model, state, Gradients(weights=[gw], biases=[gb], inputs=np.zeros((1, 2))))

    for (i, j), theta in np.ndenumerate(start_w):
        expected = _scripted_adam(theta, [float(gw[i, j]) for gw, _ in script], 0.01)
        assert model.weights[0][i, j] == pytest.approx(expected, rel=1e-10, abs=1e-12)
    for j, theta in enumerate(start_b):
        expected = _scripted_adam(theta, [float(gb[j]) for _, gb in script], 0.01)
        assert model.biases[0][j] == pytest.approx(expected, rel=1e-10, abs=1e-12)
    assert state.step == 2


def test_adam_fits_linear_toy_regression() -> None:
    rng = np.random.default_rng(7)
    x = rng.normal(size=(200, 3))
    y = x @ rng.uniform(-1.0, 1.0, size=(3, 2)) + rng.uniform(-1.0, 1.0, size=2)
    model = mlp((3, 16, 2), rng)
    state = init_adam(model, learning_rate=1e-2)

    initial, _ = mse(forward(model, x), y)
    for _ in range(200):
        out, cache = forward_train(model, x)
        _, grad = mse(out, y)
        adam_step(model, state, backward(model, cache, grad))
    final, _ = mse(forward(model, x), y)

    assert final <= 0.1 * initial
