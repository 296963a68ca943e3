"""Matplotlib renderings of evaluation reports.

Figures are written to files next to the machine-readable report output;
no interactive backend is ever required.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import LOCAL_ROW_LABEL, METRIC_NAMES, PUBLISHED_ROWS, EvalReport

_METRIC_LABELS = ("ROUGE-1", "ROUGE-2", "ROUGE-L")


def render_comparison_figure(report: EvalReport, path: str | Path) -> Path:
    """Grouped bars: this run's averages next to the published rows."""
    labels = [LOCAL_ROW_LABEL] + [row[0] for row in PUBLISHED_ROWS]
    values = np.array(
        [[report.averages[name] for name in METRIC_NAMES]]
        + [list(row[1:]) for row in PUBLISHED_ROWS]
    )
    x = np.arange(len(labels))
    width = 0.26
    fig, ax = plt.subplots(figsize=(10, 4.5))
    for i, metric in enumerate(_METRIC_LABELS):
        ax.bar(x + (i - 1) * width, values[:, i], width, label=metric)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=25, ha="right", fontsize=8)
    ax.set_ylabel("score")
    ax.set_ylim(0, 1)
    ax.legend()
    ax.set_title("ROUGE comparison")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_records_figure(report: EvalReport, path: str | Path) -> Path:
    """Per-record F values for the three metric families."""
    ids = [s.record_id for s in report.records]
    if not ids:
        ids = ["(none)"]
        values = np.zeros((1, 3))
    else:
        values = np.array(
            [[s.rouge1.f, s.rouge2.f, s.rougeL.f] for s in report.records])
    x = np.arange(len(ids))
    width = 0.26
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(ids) + 3), 4))
    for i, metric in enumerate(_METRIC_LABELS):
        ax.bar(x + (i - 1) * width, values[:, i], width, label=metric)
    ax.set_xticks(x)
    ax.set_xticklabels(ids, rotation=25, ha="right", fontsize=8)
    ax.set_ylabel("F score")
    ax.set_ylim(0, 1)
    ax.legend()
    ax.set_title("Per-record ROUGE F scores")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_report_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Render every report figure into out_dir; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        render_comparison_figure(report, out_dir / "comparison.png"),
        render_records_figure(report, out_dir / "records.png"),
    ]
