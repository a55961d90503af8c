# packages/infra/phumobcal_infra/storage/files.py
"""
Plain-file helpers. Every CSV starts with `# config_digest=...` and `# seed=...`
comment lines; every JSON document carries the same two keys. Floats are written
with 17 significant digits, which round-trips float64 exactly.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from phumobcal_core.domain.curves import IVCurve
from phumobcal_core.domain.params import ParamVector
from phumobcal_core.ports.artifact_store import RunStamp
from phumobcal_core.shared.errors import CheckpointFormatError, MissingArtifactError

FLOAT_FORMAT = "%.17g"
CURVE_COLUMNS = ("voltage_V", "current_A")


def require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifactError(str(path))
    return path


def jsonable(value: Any) -> Any:
    """NaN/inf become null; numpy scalars and arrays become plain Python values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: Path, payload: dict[str, Any], stamp: RunStamp | None = None) -> Path:
    document = dict(payload)
    if stamp is not None:
        document.update(config_digest=stamp.config_digest, seed=stamp.seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(document), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict[str, Any]:
    try:
        data = json.loads(require(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise CheckpointFormatError(f"{path}: expected a JSON object")
    return data


def stamp_of(document: dict[str, Any], *, source: Path) -> RunStamp:
    try:
        return RunStamp(config_digest=str(document["config_digest"]), seed=int(document["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{source}: missing config_digest/seed") from exc


def write_frame(path: Path, frame: pd.DataFrame, stamp: RunStamp) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# config_digest={stamp.config_digest}\n# seed={stamp.seed}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_frame(path: Path) -> tuple[pd.DataFrame, RunStamp]:
    require(path)
    meta: dict[str, str] = {}
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return frame, stamp_of(meta, source=path)


def write_curve_csv(path: Path, curve: IVCurve, stamp: RunStamp) -> Path:
    """52 rows including the 0 V point."""
    frame = pd.DataFrame({CURVE_COLUMNS[0]: curve.voltages, CURVE_COLUMNS[1]: curve.full_currents})
    return write_frame(path, frame, stamp)


def read_curve_csv(path: Path) -> IVCurve:
    frame, _ = read_frame(path)
    missing = [c for c in CURVE_COLUMNS if c not in frame.columns]
    if missing:
        raise CheckpointFormatError(f"{path}: missing columns {missing}")
    voltages = frame[CURVE_COLUMNS[0]].to_numpy(dtype=np.float64)
    currents = frame[CURVE_COLUMNS[1]].to_numpy(dtype=np.float64)
    return IVCurve(voltages=voltages, currents=currents[1:])


def write_params_json(path: Path, params: ParamVector, stamp: RunStamp | None = None) -> Path:
    return write_json(path, {"params": params.to_dict()}, stamp)


def read_params_json(path: Path) -> ParamVector:
    document = read_json(path)
    try:
        return ParamVector.from_dict(document.get("params", document))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{path}: invalid parameter document ({exc})") from exc
