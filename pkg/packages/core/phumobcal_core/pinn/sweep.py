# packages/core/phumobcal_core/pinn/sweep.py
from __future__ import annotations

import logging
from dataclasses import dataclass

from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, field_validator

from phumobcal_core.datagen.dataset import Dataset
from phumobcal_core.datagen.sampling import SplitTag
from phumobcal_core.pinn.models import AutoencoderModel
from phumobcal_core.pinn.training import TrainConfig, method_label, train_head
from phumobcal_core.shared.errors import DomainError, PhumobcalError, TrainingDivergenceError

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("lambda", "val_total", "val_mse", "val_phy", "test_violations")
DEFAULT_GRID: tuple[float, ...] = tuple(round(0.02 * i, 10) for i in range(11))


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    grid: tuple[float, ...] = DEFAULT_GRID

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("lambda grid must not be empty")
        if any(v < 0 for v in value):
            raise ValueError(f"lambda values must be >= 0, got {value}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"lambda grid must be strictly increasing, got {value}")
        return value


@dataclass(frozen=True, slots=True)
class SweepRow:
    lambda_: float
    val_total: float
    val_mse: float
    val_phy: float
    test_violations: int

    @property
    def label(self) -> str:
        return method_label(self.lambda_)

    def as_record(self) -> dict[str, float | int]:
        values = (self.lambda_, self.val_total, self.val_mse, self.val_phy, self.test_violations)
        return dict(zip(SWEEP_COLUMNS, values, strict=True))


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    minima: list[float]


def local_minima(values: list[float]) -> list[int]:
    """
    Indices strictly lower than each neighbour. Endpoints count when lower than
    their single neighbour; a one-point series is its own minimum.
    """
    n = len(values)
    if n == 1:
        return [0]
    found = []
    for i, v in enumerate(values):
        left = values[i - 1] if i > 0 else float("inf")
        right = values[i + 1] if i < n - 1 else float("inf")
        if v < left and v < right:
            found.append(i)
    return found


def _sweep_entry(ae: AutoencoderModel, dataset: Dataset, config: TrainConfig, lambda_: float) -> SweepRow:
    try:
        run = train_head(ae, dataset, config.with_lambda(lambda_))
    except TrainingDivergenceError as exc:
        raise TrainingDivergenceError(f"lambda={lambda_:g}: {exc}", epoch=exc.epoch, lambda_=lambda_) from exc
    except PhumobcalError as exc:
        raise PhumobcalError(f"lambda={lambda_:g}: {exc}") from exc

    final = run.final_val
    assert final is not None
    return SweepRow(
        lambda_=lambda_,
        val_total=final.total,
        val_mse=final.mse,
        val_phy=final.phy,
        test_violations=run.violations.get(SplitTag.TEST.value, 0),
    )


def sweep_lambda(
    ae: AutoencoderModel,
    dataset: Dataset,
    grid: SweepConfig | tuple[float, ...],
    config: TrainConfig,
    *,
    n_jobs: int = 1,
) -> SweepResult:
    """
    One full head training per lambda, all sharing `config.seed`. Entries are
    independent, so they may run on separate workers; row order follows the grid.
    """
    sweep = grid if isinstance(grid, SweepConfig) else _validated(grid)
    if 0.0 not in sweep.grid:
        logger.warning("Lambda grid %s has no 0 entry; the AE-NN baseline is missing from the sweep", sweep.grid)

    logger.info("Sweeping %d lambda values (n_jobs=%d)", len(sweep.grid), n_jobs)
    if n_jobs == 1:
        rows = [_sweep_entry(ae, dataset, config, lam) for lam in sweep.grid]
    else:
        rows = list(Parallel(n_jobs=n_jobs)(delayed(_sweep_entry)(ae, dataset, config, lam) for lam in sweep.grid))

    for row in rows:
        logger.info(
            "lambda=%g val_total=%.4e val_mse=%.4e val_phy=%.4e test_violations=%d",
            row.lambda_,
            row.val_total,
            row.val_mse,
            row.val_phy,
            row.test_violations,
        )
    minima = [rows[i].lambda_ for i in local_minima([r.val_total for r in rows])]
    logger.info("Validation-loss local minima at lambda=%s", minima)
    return SweepResult(rows=rows, minima=minima)


def _validated(grid: tuple[float, ...]) -> SweepConfig:
    try:
        return SweepConfig(grid=tuple(float(g) for g in grid))
    except ValueError as exc:
        raise DomainError(f"invalid lambda grid: {exc}") from exc
