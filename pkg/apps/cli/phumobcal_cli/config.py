# apps/cli/phumobcal_cli/config.py
from __future__ import annotations

from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from phumobcal_core.calib.cohort import CohortConfig
from phumobcal_core.datagen.sampling import SamplingConfig
from phumobcal_core.domain.params import DeviceGeometry
from phumobcal_core.pinn.sweep import SweepConfig
from phumobcal_core.pinn.training import TrainConfig
from phumobcal_core.ports.artifact_store import RunStamp
from phumobcal_core.shared.errors import ConfigError
from phumobcal_core.shared.seeding import digest_of

# Fields that never change results, or that each artifact records for itself.
DIGEST_EXCLUDE: dict[str, Any] = {
    "output_dir": True,
    "threads": True,
    "sampling": {"seed": True},
    "training": {"lambda_": True, "log_every": True},
}


class RunConfig(BaseModel):
    """One JSON document describing a whole run. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(default=0, ge=0)
    output_dir: Path | None = None
    threads: int = Field(default=1, ge=1)
    sampling: SamplingConfig = SamplingConfig()
    geometry: DeviceGeometry = DeviceGeometry()
    training: TrainConfig = TrainConfig()
    sweep: SweepConfig = SweepConfig()
    cohort: CohortConfig = CohortConfig()


def config_digest(config: RunConfig) -> str:
    return digest_of(config.model_dump(mode="json", by_alias=True, exclude=DIGEST_EXCLUDE))


def run_stamp(config: RunConfig) -> RunStamp:
    return RunStamp(config_digest=config_digest(config), seed=config.seed)


def _validate(data: Any, *, source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration ({source}): {exc}") from exc


def load_run_config(path: Path | None) -> RunConfig:
    """Defaults when `path` is None; otherwise the JSON file, schema-validated."""
    if path is None:
        return RunConfig()
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        return RunConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration ({path}): {exc}") from exc


def apply_overrides(
    config: RunConfig,
    *,
    seed: int | None = None,
    out: Path | None = None,
    threads: int | None = None,
    lambda_: float | None = None,
    snr_db: float | None = None,
    n_samples: int | None = None,
) -> RunConfig:
    """Each flag replaces exactly one config path; the result is re-validated."""
    data = config.model_dump(mode="json", by_alias=True)
    if seed is not None:
        data["seed"] = seed
    if out is not None:
        data["output_dir"] = str(out)
    if threads is not None:
        data["threads"] = threads
    if lambda_ is not None:
        data["training"]["lambda"] = lambda_
    if snr_db is not None:
        data["training"]["snr_db"] = snr_db
    if n_samples is not None:
        data["sampling"]["n_samples"] = n_samples
    return _validate(data, source="command-line overrides")


def resolve_output_dir(config: RunConfig, default_root: Path) -> Path:
    return config.output_dir if config.output_dir is not None else default_root
