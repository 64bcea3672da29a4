"""Figure rendering for training logs and evaluation reports.

Files are written next to the text outputs they illustrate; the Agg
backend keeps rendering headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def loss_curve(history, path: str | Path) -> Path | None:
    """Epoch-mean training loss as a line plot; skipped for empty history."""
    if not history:
        return None
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([s.epoch for s in history], [s.mean_loss for s in history], marker="o")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean pair loss")
    ax.set_title("training loss")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def report_chart(report, path: str | Path) -> Path | None:
    """Per-cluster ROUGE-1/ROUGE-2 bars plus the macro mean."""
    rows = [r for r in report.rows if r.error is None]
    if not rows:
        return None
    path = Path(path)
    labels = [r.cluster_id for r in rows] + ["mean"]
    r1 = [100 * r.rouge1 for r in rows] + [100 * report.mean1]
    r2 = [100 * r.rouge2 for r in rows] + [100 * report.mean2]
    x = range(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6, 0.7 * len(labels)), 4))
    ax.bar([i - width / 2 for i in x], r1, width, label="ROUGE-1")
    ax.bar([i + width / 2 for i in x], r2, width, label="ROUGE-2")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("recall (%)")
    ax.set_title("summary quality by cluster")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
