"""Figures for the ``estimate`` and ``report show`` commands."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .coverage import CoverageReport  # noqa: E402
from .model import SIC_TAXONOMY_IFR, InstrumentationMode, OverheadModel, estimate_tcpu  # noqa: E402


def plot_tcpu(model: OverheadModel, path: str | Path, budget: float = 2.0, highlight: float | None = None) -> Path:
    """t_CPU against IFR for both modes, with the budget line and reference contexts."""
    path = Path(path)
    top = 0.0
    for mode in InstrumentationMode:
        top = max(top, (budget - model.intercept) / model.slope(mode))
    xmax = min(1.0, max(top * 1.5, (highlight or 0) * 1.2, SIC_TAXONOMY_IFR["batch-100"] * 2))
    xs = [xmax * i / 200 for i in range(201)]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for mode, style in ((InstrumentationMode.FE, "-"), (InstrumentationMode.IR, "--")):
        ax.plot(xs, [estimate_tcpu(model, mode, x) for x in xs], style, label=f"{mode.value.upper()} (slope {model.slope(mode):g})")
    ax.axhline(budget, color="grey", linewidth=0.8, linestyle=":", label=f"{budget:g}x budget")
    for name in ("median-commit", "largest-commit", "batch-100"):
        x = SIC_TAXONOMY_IFR[name]
        if x <= xmax:
            ax.axvline(x, color="tab:green", alpha=0.3, linewidth=0.8)
            ax.annotate(name, (x, model.intercept), rotation=90, fontsize=7, va="bottom", ha="right")
    if highlight is not None:
        ax.axvline(highlight, color="tab:red", linewidth=1.0, label=f"IFR {highlight:g}")
    ax.set_xlabel("IFR")
    ax.set_ylabel("t_CPU")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_coverage(report: CoverageReport, path: str | Path) -> Path:
    """Hit counts per target; uncovered targets show as empty bars."""
    path = Path(path)
    labels = [t.function or t.pattern for t in report.per_target]
    hits = [t.total_hits for t in report.per_target]
    fig, ax = plt.subplots(figsize=(6.4, max(2.0, 0.35 * len(labels) + 1.2)))
    colors = ["tab:blue" if h > 0 else "tab:red" for h in hits]
    ax.barh(range(len(labels)), hits, color=colors)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("hit count")
    ax.set_title(f"{report.build_id}: commit coverage {report.commit_coverage:.3f}", fontsize=9)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
