# packages/core/phumobcal_core/pinn/models.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Final

import numpy as np

from phumobcal_core.domain.curves import N_FEATURES
from phumobcal_core.domain.params import N_TARGETS
from phumobcal_core.nn.network import NetworkModel, forward, mlp
from phumobcal_core.shared.errors import DimensionMismatchError

LATENT_DIM: Final[int] = 10
ENCODER_DIMS: Final[tuple[int, ...]] = (N_FEATURES, 40, 24, LATENT_DIM)
DECODER_DIMS: Final[tuple[int, ...]] = tuple(reversed(ENCODER_DIMS))
HEAD_DIMS: Final[tuple[int, ...]] = (LATENT_DIM, 128, 128, 128, 128, N_TARGETS)


@dataclass(eq=False)
class AutoencoderModel:
    encoder: NetworkModel
    decoder: NetworkModel

    def __post_init__(self) -> None:
        if self.encoder.input_dim != N_FEATURES or self.decoder.output_dim != N_FEATURES:
            raise DimensionMismatchError(
                f"autoencoder must map {N_FEATURES} -> {N_FEATURES}, "
                f"got {self.encoder.input_dim} -> {self.decoder.output_dim}"
            )
        if self.encoder.output_dim != LATENT_DIM or self.decoder.input_dim != LATENT_DIM:
            raise DimensionMismatchError(
                f"latent dimension must be {LATENT_DIM}, got encoder {self.encoder.output_dim} / "
                f"decoder {self.decoder.input_dim}"
            )

    def copy(self) -> AutoencoderModel:
        return AutoencoderModel(encoder=self.encoder.copy(), decoder=self.decoder.copy())

    def same_as(self, other: AutoencoderModel) -> bool:
        return self.encoder.same_as(other.encoder) and self.decoder.same_as(other.decoder)


@dataclass(eq=False)
class HeadModel:
    network: NetworkModel

    def __post_init__(self) -> None:
        if self.network.layer_dims != HEAD_DIMS:
            raise DimensionMismatchError(f"head dims must be {HEAD_DIMS}, got {self.network.layer_dims}")

    def copy(self) -> HeadModel:
        return HeadModel(network=self.network.copy())


def init_autoencoder(rng: np.random.Generator) -> AutoencoderModel:
    return AutoencoderModel(encoder=mlp(ENCODER_DIMS, rng), decoder=mlp(DECODER_DIMS, rng))


def init_head(rng: np.random.Generator) -> HeadModel:
    return HeadModel(network=mlp(HEAD_DIMS, rng))


def encode(ae: AutoencoderModel, features: np.ndarray) -> np.ndarray:
    """Scaled 51-point feature vector(s) -> 10-dimensional latent vector(s)."""
    return forward(ae.encoder, features)


def reconstruct(ae: AutoencoderModel, features: np.ndarray) -> np.ndarray:
    return forward(ae.decoder, forward(ae.encoder, features))
