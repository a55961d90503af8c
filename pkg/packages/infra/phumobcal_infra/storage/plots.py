# packages/infra/phumobcal_infra/storage/plots.py
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from phumobcal_core.calib.summary import ReportSummary  # noqa: E402
from phumobcal_core.ports.artifact_store import RunStamp  # noqa: E402


def write_box_plot_svg(path: Path, summary: ReportSummary) -> Path | None:
    """
    Linear-scale R² whiskers per method, drawn from the stored five-number summaries
    (whiskers at min/max). Returns None when no method has scores.
    """
    stats = [
        {
            "label": m.label,
            "whislo": m.quartiles_linear.minimum,
            "q1": m.quartiles_linear.q1,
            "med": m.quartiles_linear.median,
            "q3": m.quartiles_linear.q3,
            "whishi": m.quartiles_linear.maximum,
            "fliers": [],
        }
        for m in summary.methods
        if m.quartiles_linear is not None
    ]
    if not stats:
        return None

    with plt.rc_context({"svg.hashsalt": summary.config_digest, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(4.0 + 1.2 * len(stats), 4.0))
        ax.bxp(stats, showfliers=False)
        ax.set_ylabel("R² (linear current)")
        ax.set_title("Re-simulation R² across the cohort")
        ax.grid(axis="y", alpha=0.3)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(
            path,
            format="svg",
            metadata={
                "Date": None,
                "Description": f"config_digest={summary.config_digest} seed={summary.seed}",
            },
        )
        plt.close(fig)
    return path


def write_loss_history_svg(
    path: Path,
    history: pd.DataFrame,
    *,
    columns: tuple[str, ...],
    title: str,
    stamp: RunStamp,
) -> Path | None:
    """Per-epoch loss curves on a log axis. Returns None for an empty history."""
    if history.empty:
        return None

    with plt.rc_context({"svg.hashsalt": stamp.config_digest, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for column in columns:
            ax.plot(history["epoch"], history[column], label=column, linewidth=1.2)
        ax.set_yscale("log")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.set_title(title)
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(
            path,
            format="svg",
            metadata={"Date": None, "Description": f"config_digest={stamp.config_digest} seed={stamp.seed}"},
        )
        plt.close(fig)
    return path
