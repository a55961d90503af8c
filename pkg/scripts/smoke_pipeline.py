# scripts/smoke_pipeline.py
from __future__ import annotations

import logging
import tempfile
from pathlib import Path

from phumobcal_cli.main import run

# Small enough to finish in well under a minute on a laptop.
TINY_CONFIG = """
{
  "seed": 7,
  "sampling": {"n_samples": 120},
  "training": {"max_epochs": 5, "ae_max_epochs": 5, "batch_size": 32, "log_every": 1},
  "sweep": {"grid": [0.0, 0.1]},
  "cohort": {"curves_per_group": 3}
}
"""


def main() -> None:
    logging.basicConfig(level="INFO")
    with tempfile.TemporaryDirectory() as tmp:
        config = Path(tmp) / "run.json"
        config.write_text(TINY_CONFIG, encoding="utf-8")
        common = ["--config", str(config), "--out", str(Path(tmp) / "out")]

        for command in (["generate"], ["train", "--lambda", "0"], ["train"], ["sweep"], ["calibrate"], ["report"]):
            code = run([*command, *common])
            print(command, "->", code)
            if code != 0:
                raise SystemExit(code)


if __name__ == "__main__":
    main()
