# packages/core/phumobcal_core/nn/adam.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from phumobcal_core.nn.network import Gradients, NetworkModel
from phumobcal_core.shared.errors import DimensionMismatchError


@dataclass(eq=False)
class AdamState:
    m_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_weights: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0
    learning_rate: float = 1.0e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1.0e-8


def init_adam(model: NetworkModel, learning_rate: float = 1.0e-3) -> AdamState:
    return AdamState(
        m_weights=[np.zeros_like(w) for w in model.weights],
        m_biases=[np.zeros_like(b) for b in model.biases],
        v_weights=[np.zeros_like(w) for w in model.weights],
        v_biases=[np.zeros_like(b) for b in model.biases],
        learning_rate=learning_rate,
    )


def _update(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray, state: AdamState) -> None:
    if grad.shape != param.shape:
        raise DimensionMismatchError(f"gradient shape {grad.shape} does not match parameter {param.shape}")
    m *= state.beta1
    m += (1.0 - state.beta1) * grad
    v *= state.beta2
    v += (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**state.step)
    v_hat = v / (1.0 - state.beta2**state.step)
    param -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)


def adam_step(model: NetworkModel, state: AdamState, grads: Gradients) -> tuple[NetworkModel, AdamState]:
    """Bias-corrected Adam update, applied in place; returns the same objects."""
    state.step += 1
    for i in range(model.n_layers):
        _update(model.weights[i], grads.weights[i], state.m_weights[i], state.v_weights[i], state)
        _update(model.biases[i], grads.biases[i], state.m_biases[i], state.v_biases[i], state)
    model.version += 1
    return model, state
