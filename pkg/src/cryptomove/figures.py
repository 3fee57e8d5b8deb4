"""Report figures rendered to PNG files.

Rendering is headless and deterministic: fixed backend, fixed dpi, and the
writer's software tag stripped so reruns produce byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import OutputError

_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}
_CLASS_COLORS = {"down": "#c44e52", "up": "#55a868"}


def _finish(fig, path):
    try:
        fig.savefig(path, **_SAVE_KW)
    except OSError as exc:
        raise OutputError(f"cannot write figure: {exc}") from exc
    finally:
        plt.close(fig)


def save_class_distribution(dist, path, title="Class balance") -> None:
    """Bar chart of down/up label counts with percentage annotations."""
    fig, ax = plt.subplots(figsize=(5, 4))
    names = ["down", "up"]
    counts = [dist.counts.get(0, 0), dist.counts.get(1, 0)]
    pcts = [dist.percentages.get(0, 0.0), dist.percentages.get(1, 0.0)]
    bars = ax.bar(names, counts, color=[_CLASS_COLORS[n] for n in names])
    for rect, pct in zip(bars, pcts):
        ax.annotate(
            f"{pct:.1f}%",
            (rect.get_x() + rect.get_width() / 2, rect.get_height()),
            ha="center",
            va="bottom",
        )
    ax.set_ylabel("instances")
    ax.set_title(title)
    fig.tight_layout()
    _finish(fig, path)


def save_metric_bars(results, path, title="Out-of-bag metrics") -> None:
    """Grouped bars of mean accuracy/precision/recall/f1 with std whiskers,
    one group per configuration label.

    results: sequence of (label, MetricDistribution); failed distributions
    are skipped.
    """
    rows = [(label, d) for label, d in results if not d.failed]
    if not rows:
        raise ValueError("no successful results to plot")
    metrics = ("acc", "prec", "rec", "f1")
    labels = [label for label, _ in rows]
    x = np.arange(len(rows), dtype=float)
    width = 0.2
    fig, ax = plt.subplots(figsize=(max(6, 1.8 * len(rows)), 4))
    for j, metric in enumerate(metrics):
        means = [getattr(d, f"{metric}_mean") for _, d in rows]
        stds = [getattr(d, f"{metric}_std") for _, d in rows]
        ax.bar(x + (j - 1.5) * width, means, width, yerr=stds, capsize=3, label=metric)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title(title)
    ax.legend(ncol=4, fontsize="small")
    fig.tight_layout()
    _finish(fig, path)


def save_loss_traces(traces, path, title="Training loss") -> None:
    """Per-epoch loss curves; traces is a mapping label -> 1-D array."""
    if not traces:
        raise ValueError("no traces to plot")
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, trace in traces.items():
        trace = np.asarray(trace)
        ax.plot(np.arange(1, len(trace) + 1), trace, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    _finish(fig, path)
