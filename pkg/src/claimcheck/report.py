"""Figure rendering for the CLI report paths.

Each command that writes a delimited record file can also render the
matching matplotlib figure next to it (PNG, Agg backend, no display).
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .verdict import CLASS_NAMES, MetricsReport

_SAVE_OPTS = {"dpi": 120, "bbox_inches": "tight", "metadata": {"Software": None}}


def render_loss_curve(losses: Sequence[float], path: str | Path, title: str = "training loss") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(range(len(losses)), losses, lw=1.5)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean cross-entropy")
    ax.set_title(title)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_metrics(report: MetricsReport, path: str | Path, title: str = "classification metrics") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    metrics = ["precision", "recall", "f1"]
    width = 0.35
    xs = range(len(metrics))
    for offset, (cls, name) in enumerate(zip(report.mean.per_class, CLASS_NAMES)):
        values = [cls.precision, cls.recall, cls.f1]
        ax.bar([x + offset * width for x in xs], values, width, label=name)
    ax.axhline(report.mean.macro_f1, color="gray", ls="--", lw=1,
               label=f"macro F1 = {report.mean.macro_f1:.3f}")
    ax.set_xticks([x + width / 2 for x in xs])
    ax.set_xticklabels(metrics)
    ax.set_ylim(0, 1.05)
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(title)
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_similarity_histogram(values: Sequence[float], path: str | Path,
                                threshold: float | None = None) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(values, bins=30, range=(0.0, 1.0), color="#4878a8")
    if threshold is not None:
        ax.axvline(threshold, color="crimson", ls="--", lw=1,
                   label=f"removal threshold {threshold}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("pair similarity probability")
    ax.set_ylabel("pairs")
    ax.set_title("candidate pair similarities")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path


def render_ap_table(ap_values: Mapping[int, float], path: str | Path,
                    title: str = "retrieval precision") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ks = sorted(ap_values)
    ax.bar([f"AP@{k}" for k in ks], [ap_values[k] for k in ks], color="#4878a8")
    ax.set_ylim(0, 1.05)
    for i, k in enumerate(ks):
        ax.text(i, ap_values[k] + 0.02, f"{ap_values[k]:.2f}", ha="center", fontsize=8)
    ax.set_title(title)
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    return path
