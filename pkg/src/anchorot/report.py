"""Figure rendering for CLI reports.  Figures are written next to the
delimited output and never shown interactively."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["bench_figure", "knn_figure"]


def bench_figure(rows, out_path) -> None:
    """Log-log runtime-vs-size plot, one line per method."""
    methods = sorted({r["method"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for method in methods:
        pts = sorted((r["n"], r["seconds"]) for r in rows if r["method"] == method)
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
    ax.set_xlabel("points per side")
    ax.set_ylabel("seconds")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def knn_figure(summary: dict, out_path) -> None:
    """Bar chart of top-k leave-one-out retrieval accuracies."""
    keys = [k for k in ("top1", "top3", "top5") if k in summary]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(keys, [summary[k] for k in keys], color="steelblue")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_title(summary.get("metric", ""))
    for i, k in enumerate(keys):
        ax.text(i, summary[k] + 0.02, f"{summary[k]:.3f}", ha="center")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
