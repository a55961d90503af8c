# packages/core/phumobcal_core/nn/checkpoint.py
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Final

from pydantic import BaseModel, ConfigDict, ValidationError

from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.nn.network import NetworkModel
from phumobcal_core.shared.errors import CheckpointFormatError, PhumobcalError

FORMAT_VERSION: Final[int] = 1


class _NetworkPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layer_dims: list[int]
    activations: list[str]
    weights: list[list[list[float]]]
    biases: list[list[float]]


class _ScalerPayload(BaseModel):
    model_config = ConfigDict(extra="allow")

    kind: str
    n_dims: int


class _CheckpointPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format_version: int
    kind: str
    seed: int
    config_digest: str
    networks: dict[str, _NetworkPayload]
    scalers: dict[str, _ScalerPayload] = {}
    metadata: dict[str, Any] = {}


@dataclass
class Checkpoint:
    """Named networks plus the scalers and run metadata needed to use them."""

    kind: str
    networks: dict[str, NetworkModel]
    seed: int
    config_digest: str
    scalers: dict[str, ScalerState] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)


def encode_checkpoint(ckpt: Checkpoint) -> str:
    """
    Canonical JSON text. Python's float repr is the shortest round-tripping decimal,
    so every float64 survives decode exactly and re-encoding is byte-identical.
    """
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": ckpt.kind,
        "seed": int(ckpt.seed),
        "config_digest": ckpt.config_digest,
        "networks": {name: net.to_dict() for name, net in ckpt.networks.items()},
        "scalers": {name: s.to_dict() for name, s in ckpt.scalers.items()},
        "metadata": ckpt.metadata,
    }
    try:
        return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"
    except ValueError as exc:
        raise CheckpointFormatError(f"checkpoint '{ckpt.kind}' contains non-finite values") from exc


def decode_checkpoint(text: str, *, source: str = "<checkpoint>") -> Checkpoint:
    """
    Raises:
        CheckpointFormatError: malformed JSON, schema violation, format version mismatch,
            or a layer whose stored arrays disagree with its declared dims.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"{source}: not valid JSON ({exc})") from exc

    if isinstance(raw, dict) and raw.get("format_version") != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{source}: format_version {raw.get('format_version')!r} is not supported (expected {FORMAT_VERSION})"
        )
    try:
        payload = _CheckpointPayload.model_validate(raw)
    except ValidationError as exc:
        raise CheckpointFormatError(f"{source}: invalid checkpoint: {exc}") from exc

    networks: dict[str, NetworkModel] = {}
    for name, net in payload.networks.items():
        try:
            networks[name] = NetworkModel.from_dict(net.model_dump())
        except (PhumobcalError, ValueError) as exc:
            raise CheckpointFormatError(f"{source}: network '{name}': {exc}") from exc

    scalers: dict[str, ScalerState] = {}
    for name, scaler in payload.scalers.items():
        try:
            scalers[name] = ScalerState.from_dict(scaler.model_dump())
        except (PhumobcalError, KeyError, ValueError) as exc:
            raise CheckpointFormatError(f"{source}: scaler '{name}': {exc}") from exc

    return Checkpoint(
        kind=payload.kind,
        networks=networks,
        seed=payload.seed,
        config_digest=payload.config_digest,
        scalers=scalers,
        metadata=payload.metadata,
    )
