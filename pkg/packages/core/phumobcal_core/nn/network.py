# packages/core/phumobcal_core/nn/network.py
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any

import numpy as np

from phumobcal_core.shared.errors import DimensionMismatchError, DomainError, StaleCacheError


class Activation(StrEnum):
    RELU = "relu"
    IDENTITY = "identity"


@dataclass(eq=False)
class NetworkModel:
    """
    Dense MLP in float64. `weights[i]` has shape (layer_dims[i], layer_dims[i+1]) and
    inputs are row vectors, so a batch is (batch, layer_dims[0]).

    `version` increases on every in-place parameter update; forward caches remember it.
    """

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[Activation, ...]
    version: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        self.activations = tuple(Activation(a) for a in self.activations)
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in self.biases]
        validate_network(self)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def copy(self) -> NetworkModel:
        return NetworkModel(
            layer_dims=self.layer_dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activations=self.activations,
        )

    def same_as(self, other: NetworkModel) -> bool:
        """Bitwise parameter equality."""
        return (
            self.layer_dims == other.layer_dims
            and self.activations == other.activations
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights, strict=True))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases, strict=True))
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "layer_dims": list(self.layer_dims),
            "activations": [a.value for a in self.activations],
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NetworkModel:
        return cls(
            layer_dims=tuple(data["layer_dims"]),
            weights=[np.array(w, dtype=np.float64, ndmin=2) for w in data["weights"]],
            biases=[np.array(b, dtype=np.float64) for b in data["biases"]],
            activations=tuple(data["activations"]),
        )


def validate_network(model: NetworkModel) -> None:
    dims = model.layer_dims
    if len(dims) < 2:
        raise DimensionMismatchError("a network needs at least an input and an output dimension")
    n_layers = len(dims) - 1
    if len(model.weights) != n_layers or len(model.biases) != n_layers or len(model.activations) != n_layers:
        raise DimensionMismatchError(
            f"{n_layers} layers implied by dims {dims}, got {len(model.weights)} weights, "
            f"{len(model.biases)} biases, {len(model.activations)} activations"
        )
    for i, (w, b) in enumerate(zip(model.weights, model.biases, strict=True)):
        if w.shape != (dims[i], dims[i + 1]):
            raise DimensionMismatchError(
                f"layer {i}: weight shape {w.shape} does not match dims ({dims[i]}, {dims[i + 1]})"
            )
        if b.shape != (dims[i + 1],):
            raise DimensionMismatchError(f"layer {i}: bias shape {b.shape} does not match dim {dims[i + 1]}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise DomainError(f"layer {i}: non-finite parameters")
    if model.activations[-1] is not Activation.IDENTITY:
        raise DomainError("the output layer must use the identity activation")


def init_network(
    layer_dims: Sequence[int],
    activations: Sequence[Activation | str],
    rng: np.random.Generator,
) -> NetworkModel:
    """He-uniform weights for ReLU layers, Glorot-uniform for identity layers, zero biases."""
    dims = tuple(int(d) for d in layer_dims)
    acts = tuple(Activation(a) for a in activations)
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], acts, strict=True):
        if act is Activation.RELU:
            limit = math.sqrt(6.0 / fan_in)
        else:
            limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return NetworkModel(layer_dims=dims, weights=weights, biases=biases, activations=acts)


def mlp(layer_dims: Sequence[int], rng: np.random.Generator) -> NetworkModel:
    """ReLU on every hidden layer, identity on the output."""
    n_layers = len(layer_dims) - 1
    acts = [Activation.RELU] * (n_layers - 1) + [Activation.IDENTITY]
    return init_network(layer_dims, acts, rng)


@dataclass(frozen=True, eq=False)
class ForwardCache:
    """Layer inputs and pre-activations recorded by a training-mode forward pass."""

    model_id: int
    version: int
    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]


@dataclass(frozen=True, eq=False)
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    inputs: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([g.reshape(-1) for pair in zip(self.weights, self.biases) for g in pair])


def _as_batch(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    batch = np.asarray(x, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise DimensionMismatchError(f"network expects input length {model.input_dim}, got shape {np.shape(x)}")
    return batch


def _activate(z: np.ndarray, act: Activation) -> np.ndarray:
    if act is Activation.RELU:
        return np.maximum(z, 0.0)
    return z


def forward(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    """Inference pass. A 1-D input returns a 1-D output."""
    a = _as_batch(model, x)
    for w, b, act in zip(model.weights, model.biases, model.activations, strict=True):
        a = _activate(a @ w + b, act)
    return a[0] if np.ndim(x) == 1 else a


def forward_train(model: NetworkModel, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Forward pass on a batch that also records what `backward` needs."""
    a = _as_batch(model, x)
    inputs: list[np.ndarray] = []
    pre: list[np.ndarray] = []
    for w, b, act in zip(model.weights, model.biases, model.activations, strict=True):
        inputs.append(a)
        z = a @ w + b
        pre.append(z)
        a = _activate(z, act)
    return a, ForwardCache(model_id=id(model), version=model.version, inputs=inputs, pre_activations=pre)


def backward(model: NetworkModel, cache: ForwardCache, grad_output: np.ndarray) -> Gradients:
    """
    Reverse-mode gradients of a scalar loss given dLoss/dOutput for the cached batch.
    Per-sample contributions are summed, so batch averaging belongs in `grad_output`.

    Raises:
        StaleCacheError: the cache came from another model or an older version.
    """
    if cache.model_id != id(model) or cache.version != model.version:
        raise StaleCacheError(
            f"forward cache is stale (cache version {cache.version}, model version {model.version})"
        )
    delta = np.asarray(grad_output, dtype=np.float64)
    if delta.ndim == 1:
        delta = delta[None, :]
    if delta.shape != cache.pre_activations[-1].shape:
        raise DimensionMismatchError(
            f"output gradient shape {delta.shape} does not match output {cache.pre_activations[-1].shape}"
        )

    grad_w: list[np.ndarray] = [np.empty(0)] * model.n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * model.n_layers
    for i in reversed(range(model.n_layers)):
        if model.activations[i] is Activation.RELU:
            delta = delta * (cache.pre_activations[i] > 0)
        grad_w[i] = cache.inputs[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        delta = delta @ model.weights[i].T
    return Gradients(weights=grad_w, biases=grad_b, inputs=delta)
