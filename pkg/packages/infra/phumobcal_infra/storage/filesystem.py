# packages/infra/phumobcal_infra/storage/filesystem.py
from __future__ import annotations

import logging
from pathlib import Path

import pandas as pd

from phumobcal_core.calib.calibrate import CalibrationReport, TruthComparison
from phumobcal_core.calib.cohort import Cohort, CohortTruth
from phumobcal_core.calib.summary import ReportSummary, render_text
from phumobcal_core.datagen.dataset import Dataset
from phumobcal_core.datagen.scaling import ScalerState
from phumobcal_core.domain.curves import DEFAULT_BIAS_GRID
from phumobcal_core.nn.checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint
from phumobcal_core.pinn.models import AutoencoderModel, HeadModel
from phumobcal_core.pinn.sweep import SweepResult
from phumobcal_core.pinn.training import AutoencoderRun, HeadRun
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp, StoredCalibration, StoredHead
from phumobcal_core.shared.errors import CheckpointFormatError, DimensionMismatchError
from phumobcal_infra.storage import codecs
from phumobcal_infra.storage.files import read_frame, read_json, require, stamp_of, write_frame, write_json
from phumobcal_infra.storage.plots import write_box_plot_svg, write_loss_history_svg

logger = logging.getLogger(__name__)


class FilesystemArtifactStore(ArtifactStore):
    """
    Artifacts under one output directory:

        dataset/manifest.json, dataset/records.csv
        models/autoencoder.json, models/autoencoder_history.csv, models/autoencoder_history.svg
        models/head_<label>.json, models/head_<label>_history.csv, models/head_<label>_history.svg
        sweep/sweep.csv, sweep/minima.json
        cohort/curves.csv, cohort/truth.json
        calibration/<label>/report.json, calibration/<label>/per_curve.csv
        report/summary.txt, report/summary.json, report/r2_boxplot.csv, report/r2_boxplot.svg
    """

    def __init__(self, root: Path) -> None:
        self._root = Path(root)

    @property
    def root(self) -> Path:
        return self._root

    def _path(self, *parts: str) -> Path:
        return self._root.joinpath(*parts)

    def _written(self, path: Path) -> None:
        logger.info("Wrote %s", path)

    def _write_history_plot(
        self, path: Path, frame: pd.DataFrame, *, columns: tuple[str, ...], title: str, stamp: RunStamp
    ) -> None:
        svg = write_loss_history_svg(path, frame, columns=columns, title=title, stamp=stamp)
        if svg is not None:
            self._written(svg)

    # --- dataset -------------------------------------------------------------

    def save_dataset(self, dataset: Dataset, stamp: RunStamp) -> None:
        manifest, frame = codecs.dataset_to_tables(dataset)
        self._written(write_json(self._path("dataset", "manifest.json"), manifest, stamp))
        self._written(write_frame(self._path("dataset", "records.csv"), frame, stamp))

    def load_dataset(self) -> tuple[Dataset, RunStamp]:
        manifest_path = self._path("dataset", "manifest.json")
        manifest = read_json(manifest_path)
        frame, frame_stamp = read_frame(self._path("dataset", "records.csv"))
        stamp = stamp_of(manifest, source=manifest_path)
        if frame_stamp != stamp:
            raise CheckpointFormatError(f"{self._path('dataset')}: manifest and records carry different stamps")
        return codecs.dataset_from_tables(manifest, frame, source=str(manifest_path)), stamp

    # --- models --------------------------------------------------------------

    def _write_checkpoint(self, path: Path, ckpt: Checkpoint) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(encode_checkpoint(ckpt), encoding="utf-8")
        self._written(path)

    def _read_checkpoint(self, path: Path, kind: str) -> Checkpoint:
        ckpt = decode_checkpoint(require(path).read_text(encoding="utf-8"), source=str(path))
        if ckpt.kind != kind:
            raise CheckpointFormatError(f"{path}: expected a {kind} checkpoint, found {ckpt.kind}")
        return ckpt

    def save_autoencoder(self, run: AutoencoderRun, stamp: RunStamp) -> None:
        ckpt = Checkpoint(
            kind="autoencoder",
            networks={"encoder": run.model.encoder, "decoder": run.model.decoder},
            seed=stamp.seed,
            config_digest=stamp.config_digest,
            metadata={"best_epoch": run.best_epoch, "epochs_run": len(run.history)},
        )
        self._write_checkpoint(self._path("models", "autoencoder.json"), ckpt)
        frame = codecs.ae_history_frame(run.history)
        self._written(write_frame(self._path("models", "autoencoder_history.csv"), frame, stamp))
        self._write_history_plot(
            self._path("models", "autoencoder_history.svg"),
            frame,
            columns=("train_mse", "val_mse"),
            title="Autoencoder reconstruction loss",
            stamp=stamp,
        )

    def has_autoencoder(self) -> bool:
        return self._path("models", "autoencoder.json").exists()

    def load_autoencoder(self) -> tuple[AutoencoderModel, RunStamp]:
        path = self._path("models", "autoencoder.json")
        ckpt = self._read_checkpoint(path, "autoencoder")
        try:
            model = AutoencoderModel(encoder=ckpt.networks["encoder"], decoder=ckpt.networks["decoder"])
        except (KeyError, DimensionMismatchError) as exc:
            raise CheckpointFormatError(f"{path}: {exc}") from exc
        return model, RunStamp(config_digest=ckpt.config_digest, seed=ckpt.seed)

    def _head_path(self, label: str) -> Path:
        return self._path("models", f"head_{label}.json")

    def save_head(
        self, run: HeadRun, *, input_scaler: ScalerState, target_scaler: ScalerState, stamp: RunStamp
    ) -> None:
        ckpt = Checkpoint(
            kind="head",
            networks={"head": run.model.network},
            seed=stamp.seed,
            config_digest=stamp.config_digest,
            scalers={"input": input_scaler, "target": target_scaler},
            metadata={
                "label": run.label,
                "lambda": run.lambda_,
                "best_epoch": run.best_epoch,
                "epochs_run": len(run.history),
                "violations": run.violations,
            },
        )
        self._write_checkpoint(self._head_path(run.label), ckpt)
        frame = codecs.head_history_frame(run.history)
        self._written(write_frame(self._path("models", f"head_{run.label}_history.csv"), frame, stamp))
        self._write_history_plot(
            self._path("models", f"head_{run.label}_history.svg"),
            frame,
            columns=("train_total", "val_total", "val_mse"),
            title=f"{run.label} head loss (lambda={run.lambda_:g})",
            stamp=stamp,
        )

    def load_head(self, label: str) -> StoredHead:
        path = self._head_path(label)
        ckpt = self._read_checkpoint(path, "head")
        try:
            return StoredHead(
                label=str(ckpt.metadata["label"]),
                lambda_=float(ckpt.metadata["lambda"]),
                model=HeadModel(network=ckpt.networks["head"]),
                input_scaler=ckpt.scalers["input"],
                target_scaler=ckpt.scalers["target"],
                violations={k: int(v) for k, v in ckpt.metadata.get("violations", {}).items()},
                stamp=RunStamp(config_digest=ckpt.config_digest, seed=ckpt.seed),
            )
        except (KeyError, TypeError, ValueError, DimensionMismatchError) as exc:
            raise CheckpointFormatError(f"{path}: {exc}") from exc

    def list_heads(self) -> list[str]:
        models = self._path("models")
        if not models.is_dir():
            return []
        return sorted(p.stem.removeprefix("head_") for p in models.glob("head_*.json"))

    # --- sweep ---------------------------------------------------------------

    def save_sweep(self, result: SweepResult, stamp: RunStamp) -> None:
        self._written(write_frame(self._path("sweep", "sweep.csv"), codecs.sweep_frame(result), stamp))
        minima = {"minima": result.minima, "grid": [r.lambda_ for r in result.rows]}
        self._written(write_json(self._path("sweep", "minima.json"), minima, stamp))

    def load_sweep(self) -> tuple[SweepResult, RunStamp] | None:
        csv_path = self._path("sweep", "sweep.csv")
        if not csv_path.exists():
            return None
        frame, stamp = read_frame(csv_path)
        minima = read_json(self._path("sweep", "minima.json"))
        return codecs.sweep_from_frame(frame, minima.get("minima", [])), stamp

    # --- cohort --------------------------------------------------------------

    def save_cohort(self, cohort: Cohort, truth: CohortTruth, stamp: RunStamp) -> None:
        self._written(write_frame(self._path("cohort", "curves.csv"), codecs.cohort_frame(cohort), stamp))
        self._written(write_json(self._path("cohort", "truth.json"), codecs.truth_to_dict(truth), stamp))

    def load_cohort(self) -> tuple[Cohort, RunStamp]:
        path = self._path("cohort", "curves.csv")
        frame, stamp = read_frame(path)
        return codecs.cohort_from_frame(frame, DEFAULT_BIAS_GRID, source=str(path)), stamp

    def load_truth(self) -> CohortTruth:
        path = self._path("cohort", "truth.json")
        return codecs.truth_from_dict(read_json(path), source=str(path))

    # --- calibration ---------------------------------------------------------

    def save_calibration(
        self, report: CalibrationReport, comparison: TruthComparison | None, stamp: RunStamp
    ) -> None:
        folder = self._path("calibration", report.label)
        self._written(write_json(folder / "report.json", codecs.calibration_to_dict(report, comparison), stamp))
        self._written(write_frame(folder / "per_curve.csv", codecs.per_curve_frame(report), stamp))

    def load_calibration(self, label: str) -> StoredCalibration:
        path = self._path("calibration", label, "report.json")
        document = read_json(path)
        report, comparison = codecs.calibration_from_dict(document, DEFAULT_BIAS_GRID, source=str(path))
        return StoredCalibration(report=report, comparison=comparison, stamp=stamp_of(document, source=path))

    def list_calibrations(self) -> list[str]:
        folder = self._path("calibration")
        if not folder.is_dir():
            return []
        return sorted(p.parent.name for p in folder.glob("*/report.json"))

    # --- report --------------------------------------------------------------

    def save_summary(self, summary: ReportSummary) -> list[str]:
        stamp = RunStamp(config_digest=summary.config_digest, seed=summary.seed)
        folder = self._path("report")
        folder.mkdir(parents=True, exist_ok=True)

        text_path = folder / "summary.txt"
        text_path.write_text(render_text(summary), encoding="utf-8")
        written = [text_path]

        payload = {
            "methods": [
                {
                    "label": m.label,
                    "lambda": m.lambda_,
                    "violations": m.violations,
                    "averaged": m.averaged,
                    "mean_r2_linear": m.mean_r2_linear,
                    "mean_r2_log": m.mean_r2_log,
                    "failed_curves": m.failed_curves,
                }
                for m in summary.methods
            ],
            "truth": summary.truth,
            "sweep_minima": summary.sweep_minima,
            "notes": summary.notes,
        }
        written.append(write_json(folder / "summary.json", payload, stamp))
        box = pd.DataFrame(summary.box_rows(), columns=["method", "scale", "min", "q1", "median", "q3", "max"])
        written.append(write_frame(folder / "r2_boxplot.csv", box, stamp))
        svg = write_box_plot_svg(folder / "r2_boxplot.svg", summary)
        if svg is not None:
            written.append(svg)

        for path in written:
            self._written(path)
        return [str(p) for p in written]
