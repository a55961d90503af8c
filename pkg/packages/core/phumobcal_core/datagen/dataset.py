# packages/core/phumobcal_core/datagen/dataset.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from phumobcal_core.datagen.sampling import SamplingConfig, SplitTag, assign_splits, lhs_sample
from phumobcal_core.datagen.scaling import ScalerKind, ScalerState, fit_scaler, log_features, transform
from phumobcal_core.domain.curves import IVCurve
from phumobcal_core.domain.params import DeviceGeometry, ParamVector
from phumobcal_core.physics.sbd import simulate
from phumobcal_core.shared.errors import DomainError

logger = logging.getLogger(__name__)

MIN_DATASET_SIZE = 10


@dataclass(frozen=True)
class DatasetRecord:
    curve: IVCurve
    params: ParamVector
    split: SplitTag


@dataclass(frozen=True)
class Dataset:
    """Simulated corpus with split tags and scalers fitted on the training split."""

    records: list[DatasetRecord]
    input_scaler: ScalerState
    target_scaler: ScalerState
    sampling: SamplingConfig
    geometry: DeviceGeometry
    _index: dict[SplitTag, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        tags = np.array([r.split.value for r in self.records])
        object.__setattr__(self, "_index", {tag: np.flatnonzero(tags == tag.value) for tag in SplitTag})

    def __len__(self) -> int:
        return len(self.records)

    def indices(self, split: SplitTag) -> np.ndarray:
        return self._index[split]

    def split_sizes(self) -> dict[str, int]:
        return {tag.value: int(self._index[tag].size) for tag in SplitTag}

    def currents(self, split: SplitTag | None = None) -> np.ndarray:
        chosen = self._select(split)
        return np.stack([r.curve.currents for r in chosen]) if chosen else np.empty((0, 0))

    def targets(self, split: SplitTag | None = None) -> np.ndarray:
        """Physical-unit targets (log10 N_ref) in TARGET_NAMES order."""
        chosen = self._select(split)
        return np.stack([r.params.to_targets() for r in chosen]) if chosen else np.empty((0, 0))

    def scaled_features(self, split: SplitTag | None = None) -> np.ndarray:
        return transform(self.input_scaler, log_features(self.currents(split)))

    def scaled_targets(self, split: SplitTag | None = None) -> np.ndarray:
        return transform(self.target_scaler, self.targets(split))

    def _select(self, split: SplitTag | None) -> list[DatasetRecord]:
        if split is None:
            return list(self.records)
        return [self.records[i] for i in self._index[split]]


def check_constraints(params: list[ParamVector], n_ref_floor: float) -> None:
    """Every record must satisfy mu_max > mu_min and n_ref >= the sampling floor."""
    for i, p in enumerate(params):
        if not p.phumob.is_ordered:
            raise DomainError(f"record {i}: mu_max {p.phumob.mu_max} <= mu_min {p.phumob.mu_min}")
        if p.phumob.n_ref < n_ref_floor:
            raise DomainError(f"record {i}: n_ref {p.phumob.n_ref:.4e} below {n_ref_floor:.1e}")


def simulate_all(params: list[ParamVector], geometry: DeviceGeometry, *, n_jobs: int = 1) -> list[IVCurve]:
    """Simulate in parallel; output order follows input order regardless of worker count."""
    if n_jobs == 1:
        return [simulate(p, geometry) for p in params]
    return list(Parallel(n_jobs=n_jobs)(delayed(simulate)(p, geometry) for p in params))


def fit_dataset_scalers(
    curves: list[IVCurve], params: list[ParamVector], splits: list[SplitTag]
) -> tuple[ScalerState, ScalerState]:
    train = [i for i, s in enumerate(splits) if s is SplitTag.TRAIN]
    features = log_features(np.stack([curves[i].currents for i in train]))
    targets = np.stack([params[i].to_targets() for i in train])
    return fit_scaler(ScalerKind.STANDARD, features), fit_scaler(ScalerKind.MINMAX, targets)


def build_dataset(
    sampling: SamplingConfig,
    geometry: DeviceGeometry,
    *,
    split_seed: int,
    n_jobs: int = 1,
) -> Dataset:
    """LHS draw -> forward simulation -> split tags -> scalers fitted on the training split."""
    if sampling.n_samples < MIN_DATASET_SIZE:
        raise DomainError(f"a dataset needs at least {MIN_DATASET_SIZE} samples, got {sampling.n_samples}")

    params = lhs_sample(sampling)
    check_constraints(params, sampling.ranges.n_ref[0])
    logger.info("Simulating %d curves (n_jobs=%d)", len(params), n_jobs)
    curves = simulate_all(params, geometry, n_jobs=n_jobs)

    splits = assign_splits(len(params), sampling.split_fractions, split_seed)
    input_scaler, target_scaler = fit_dataset_scalers(curves, params, splits)

    records = [DatasetRecord(curve=c, params=p, split=s) for c, p, s in zip(curves, params, splits, strict=True)]
    dataset = Dataset(
        records=records,
        input_scaler=input_scaler,
        target_scaler=target_scaler,
        sampling=sampling,
        geometry=geometry,
    )
    logger.info("Dataset ready: %s", dataset.split_sizes())
    return dataset
