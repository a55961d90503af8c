# packages/core/phumobcal_core/calib/summary.py
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from phumobcal_core.calib.metrics import QuartileStats

PHUMOB_FIELDS = ("mu_max", "mu_min", "log10_n_ref", "alpha", "theta")
VIOLATION_ROWS = ("Test", "Training", "Experiment")


@dataclass(frozen=True)
class MethodSummary:
    label: str
    lambda_: float
    violations: dict[str, int]
    averaged: dict[str, float]
    r2_linear: list[float]
    r2_log: list[float]
    quartiles_linear: QuartileStats | None
    quartiles_log: QuartileStats | None
    failed_curves: int = 0

    @property
    def mean_r2_linear(self) -> float:
        return float(np.mean(self.r2_linear)) if self.r2_linear else math.nan

    @property
    def mean_r2_log(self) -> float:
        return float(np.mean(self.r2_log)) if self.r2_log else math.nan


@dataclass(frozen=True)
class ReportSummary:
    config_digest: str
    seed: int
    methods: list[MethodSummary]
    truth: dict[str, float] | None = None
    sweep_minima: list[float] | None = None
    notes: list[str] = field(default_factory=list)

    def box_rows(self) -> list[dict[str, float | str]]:
        rows: list[dict[str, float | str]] = []
        for m in self.methods:
            for scale, q in (("linear", m.quartiles_linear), ("log", m.quartiles_log)):
                if q is None:
                    continue
                rows.append(
                    {
                        "method": m.label,
                        "scale": scale,
                        "min": q.minimum,
                        "q1": q.q1,
                        "median": q.median,
                        "q3": q.q3,
                        "max": q.maximum,
                    }
                )
        return rows


def _fmt(value: float) -> str:
    if math.isnan(value):
        return "n/a"
    return f"{value:.4g}"


def render_text(summary: ReportSummary) -> str:
    """Plain-text tables for the terminal and summary.txt."""
    methods = summary.methods
    width = max([12, *(len(m.label) + 2 for m in methods)])
    header = "".join(m.label.rjust(width) for m in methods)

    lines = [
        "phumobcal report",
        f"config_digest: {summary.config_digest}",
        f"seed: {summary.seed}",
        "",
        "Predictions violating mu_min < mu_max",
        f"{'':<12}{header}",
    ]
    for row in VIOLATION_ROWS:
        cells = "".join(str(m.violations.get(row, "-")).rjust(width) for m in methods)
        lines.append(f"{row:<12}{cells}")

    lines += ["", "Cohort-averaged PhuMob parameters", f"{'':<12}{header}{'truth'.rjust(width)}"]
    for name in PHUMOB_FIELDS:
        cells = "".join(_fmt(m.averaged.get(name, math.nan)).rjust(width) for m in methods)
        truth = _fmt(summary.truth[name]) if summary.truth else "-"
        lines.append(f"{name:<12}{cells}{truth.rjust(width)}")

    lines += ["", "Re-simulation R² (mean over curves)", f"{'':<12}{header}"]
    lines.append(f"{'linear':<12}" + "".join(_fmt(m.mean_r2_linear).rjust(width) for m in methods))
    lines.append(f"{'log':<12}" + "".join(_fmt(m.mean_r2_log).rjust(width) for m in methods))

    lines += ["", "Linear R² five-number summary (min, Q1, median, Q3, max)"]
    for m in methods:
        stats = ", ".join(_fmt(v) for v in m.quartiles_linear.as_tuple()) if m.quartiles_linear else "n/a"
        failed = f"  [{m.failed_curves} curve(s) failed]" if m.failed_curves else ""
        lines.append(f"{m.label:<12}{stats}{failed}")

    if summary.sweep_minima is not None:
        minima = ", ".join(f"{v:g}" for v in summary.sweep_minima) or "none"
        lines += ["", f"Lambda sweep validation-loss minima: {minima}"]
    for note in summary.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
