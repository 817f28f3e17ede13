"""Figure rendering for sweep and importance reports (Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evalkit import ImportanceEntry, SweepResult

_XLABELS = {
    "threshold": "filtering threshold (TB bytes per subframe)",
    "window_ms": "window size (ms)",
}


def render_sweep_plot(result: SweepResult, path) -> Path:
    """Accuracy line with kept-sample counts on a twin axis."""
    xs = [pt.value for pt in result.points if pt.report is not None]
    acc = [pt.report.accuracy for pt in result.points if pt.report is not None]
    kept = [pt.report.n_test for pt in result.points if pt.report is not None]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xs, acc, marker="o", color="tab:blue", label="accuracy")
    ax.set_xlabel(_XLABELS.get(result.parameter, result.parameter))
    ax.set_ylabel("accuracy", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    ax.grid(True, alpha=0.3)

    ax2 = ax.twinx()
    ax2.plot(xs, kept, marker="s", linestyle="--", color="tab:gray",
             label="kept test samples")
    ax2.set_ylabel("kept test samples", color="tab:gray")
    ax2.tick_params(axis="y", labelcolor="tab:gray")

    model = result.config.get("model_kind", "model")
    ax.set_title(f"{model} accuracy vs {result.parameter}")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_importance_plot(entries: list[ImportanceEntry], path,
                           top: int = 15) -> Path:
    """Horizontal bars of split counts for the top features."""
    shown = entries[:top]
    names = [e.name for e in shown][::-1]
    counts = [e.count for e in shown][::-1]

    fig, ax = plt.subplots(figsize=(7.0, 0.35 * max(len(shown), 4) + 1.2))
    ax.barh(range(len(shown)), counts, color="tab:blue")
    ax.set_yticks(range(len(shown)), names, fontsize=8)
    ax.set_xlabel("split count")
    ax.set_title(f"top {len(shown)} features by split frequency")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
