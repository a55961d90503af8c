# apps/cli/phumobcal_cli/main.py
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from phumobcal_cli.config import RunConfig, apply_overrides, load_run_config, resolve_output_dir, run_stamp
from phumobcal_cli.settings import CliSettings, load_cli_settings
from phumobcal_core.calib.summary import render_text
from phumobcal_core.ports.artifact_store import ArtifactStore, RunStamp
from phumobcal_core.shared.errors import PhumobcalError
from phumobcal_core.use_cases.build_report import BuildReport
from phumobcal_core.use_cases.calibrate_cohort import CalibrateCohort, CalibrateCohortInput
from phumobcal_core.use_cases.generate_dataset import GenerateDataset, GenerateDatasetInput
from phumobcal_core.use_cases.sweep_lambda import SweepLambda, SweepLambdaInput
from phumobcal_core.use_cases.train_models import TrainModels, TrainModelsInput
from phumobcal_infra.storage.filesystem import FilesystemArtifactStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_ERROR = 2


def cmd_generate(config: RunConfig, store: ArtifactStore, stamp: RunStamp) -> None:
    dataset = GenerateDataset(store=store).execute(
        GenerateDatasetInput(sampling=config.sampling, geometry=config.geometry, stamp=stamp, n_jobs=config.threads)
    )
    print(f"generated {len(dataset)} curves {dataset.split_sizes()}")


def cmd_train(config: RunConfig, store: ArtifactStore, stamp: RunStamp) -> None:
    result = TrainModels(store=store).execute(TrainModelsInput(training=config.training, stamp=stamp))
    final = result.head.final_val
    val_total = final.total if final is not None else float("nan")
    print(
        f"trained {result.label} lambda={result.head.lambda_:g} best_epoch={result.head.best_epoch} "
        f"val_total={val_total:.6g} violations={result.head.violations}"
    )


def cmd_sweep(config: RunConfig, store: ArtifactStore, stamp: RunStamp) -> None:
    result = SweepLambda(store=store).execute(
        SweepLambdaInput(training=config.training, sweep=config.sweep, stamp=stamp, n_jobs=config.threads)
    )
    print(f"swept {len(result.rows)} lambda values; validation-loss minima at {result.minima}")


def cmd_calibrate(config: RunConfig, store: ArtifactStore, stamp: RunStamp) -> None:
    results = CalibrateCohort(store=store).execute(
        CalibrateCohortInput(cohort=config.cohort, geometry=config.geometry, stamp=stamp, n_jobs=config.threads)
    )
    for stored in results:
        lin, log = stored.report.median_r2()
        print(f"{stored.report.label}: median R2 linear={lin:.4f} log={log:.4f} violations={stored.report.violations}")


def cmd_report(config: RunConfig, store: ArtifactStore, stamp: RunStamp) -> None:
    result = BuildReport(store=store).execute(stamp)
    sys.stdout.write(render_text(result.summary))
    logger.info("Report artifacts: %s", ", ".join(result.written))


COMMANDS: dict[str, Callable[[RunConfig, ArtifactStore, RunStamp], None]] = {
    "generate": cmd_generate,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Run configuration JSON file.")
    common.add_argument("--seed", type=int, default=None, help="Master seed (overrides seed).")
    common.add_argument("--out", type=Path, default=None, help="Output directory (overrides output_dir).")
    common.add_argument("--threads", type=int, default=None, help="Worker cap; does not change results.")
    common.add_argument("--lambda", dest="lambda_", type=float, default=None, help="Physics-loss weight.")
    common.add_argument("--snr-db", type=float, default=None, help="Training noise SNR in dB ('inf' for none).")
    common.add_argument("--n-samples", type=int, default=None, help="Number of simulated curves.")

    parser = argparse.ArgumentParser(
        prog="phumobcal",
        description="Simulation-augmented PhuMob calibration of Ga2O3 Schottky diodes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="Sample parameters and simulate the training corpus.")
    sub.add_parser("train", parents=[common], help="Train the autoencoder and one regression head.")
    sub.add_parser("sweep", parents=[common], help="Train one head per lambda and tabulate validation losses.")
    sub.add_parser("calibrate", parents=[common], help="Calibrate and verify on the pseudo-experimental cohort.")
    sub.add_parser("report", parents=[common], help="Summarize stored artifacts and draw the R² box plot.")
    return parser


def error_line(exc: BaseException) -> str:
    message = str(exc).replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
    return f'error={type(exc).__name__} message="{message}"'


def run(argv: Sequence[str] | None = None, *, settings: CliSettings | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings or load_cli_settings()
        logging.basicConfig(
            level=settings.log_level.upper(),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        config = apply_overrides(
            load_run_config(args.config),
            seed=args.seed,
            out=args.out,
            threads=args.threads,
            lambda_=args.lambda_,
            snr_db=args.snr_db,
            n_samples=args.n_samples,
        )
        stamp = run_stamp(config)
        out_dir = resolve_output_dir(config, settings.output_root)
        logger.info("%s: config_digest=%s seed=%d out=%s", args.command, stamp.config_digest, stamp.seed, out_dir)
        COMMANDS[args.command](config, FilesystemArtifactStore(out_dir), stamp)
    except PhumobcalError as exc:
        print(error_line(exc), file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        logger.exception("Unexpected failure in %s", args.command)
        print(error_line(exc), file=sys.stderr)
        return EXIT_UNEXPECTED
    return EXIT_OK


def main() -> None:
    """Process entrypoint."""
    raise SystemExit(run())


if __name__ == "__main__":
    main()
