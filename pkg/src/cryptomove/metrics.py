"""Confusion-matrix classification metrics and report table emission.

Class 1 (up) is the positive class. Zero-denominator metrics report 0.0 and
carry a flag naming the degenerate metric, which keeps report tables
total-ordered instead of NaN-poisoned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ClassDistribution, class_distribution  # noqa: F401  (re-export)
from .errors import OutputError

CLASS_ROWS = ("down", "up", "macro_avg", "weighted_avg")

REPORT_COLUMNS = (
    "model",
    "asset",
    "architecture",
    "epochs",
    "hidden_layers",
    "batch_size",
    "optimizer",
    "activation",
    "neurons",
    "acc_mean",
    "acc_std",
    "prec_mean",
    "prec_std",
    "rec_mean",
    "rec_std",
    "f1_mean",
    "f1_std",
    "iterations",
    "failures",
    "class",
)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true, y_pred) -> ConfusionMatrix:
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    if yt.shape != yp.shape or yt.ndim != 1 or len(yt) < 1:
        raise ValueError("y_true and y_pred must be equal-length non-empty vectors")
    if not (np.isin(yt, (0, 1)).all() and np.isin(yp, (0, 1)).all()):
        raise ValueError("labels must be binary")
    return ConfusionMatrix(
        tp=int(((yt == 1) & (yp == 1)).sum()),
        fp=int(((yt == 0) & (yp == 1)).sum()),
        tn=int(((yt == 0) & (yp == 0)).sum()),
        fn=int(((yt == 1) & (yp == 0)).sum()),
    )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: tuple = ()


@dataclass(frozen=True)
class ClassificationReport:
    matrix: ConfusionMatrix
    down: ClassMetrics
    up: ClassMetrics
    accuracy: float
    macro: ClassMetrics
    weighted: ClassMetrics


def _class_metrics(tp: int, fp: int, fn: int, support: int) -> ClassMetrics:
    flags = []
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision, flags = 0.0, flags + ["precision"]
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall, flags = 0.0, flags + ["recall"]
    if precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, flags = 0.0, flags + ["f1"]
    return ClassMetrics(precision, recall, f1, support, tuple(flags))


def classification_report(cm: ConfusionMatrix) -> ClassificationReport:
    """Per-class precision/recall/f1 plus accuracy and both averages.

    The macro average weights classes equally; the weighted average scales
    by class support.
    """
    if cm.total == 0:
        raise ValueError("cannot score an empty sample")
    support_up = cm.tp + cm.fn
    support_down = cm.tn + cm.fp
    up = _class_metrics(cm.tp, cm.fp, cm.fn, support_up)
    down = _class_metrics(cm.tn, cm.fn, cm.fp, support_down)
    accuracy = (cm.tp + cm.tn) / cm.total
    macro = ClassMetrics(
        (down.precision + up.precision) / 2,
        (down.recall + up.recall) / 2,
        (down.f1 + up.f1) / 2,
        cm.total,
    )
    weighted = ClassMetrics(
        (down.precision * support_down + up.precision * support_up) / cm.total,
        (down.recall * support_down + up.recall * support_up) / cm.total,
        (down.f1 * support_down + up.f1 * support_up) / cm.total,
        cm.total,
    )
    return ClassificationReport(cm, down, up, accuracy, macro, weighted)


@dataclass(frozen=True)
class ReportRow:
    """One class-level line of the evaluation table.

    hidden_layers/activation/neurons are None for architectures whose search
    space leaves them untuned; they render as "-".
    """

    model: str
    asset: str
    architecture: str
    epochs: int
    hidden_layers: int | None
    batch_size: int
    optimizer: str
    activation: str | None
    neurons: int | None
    class_name: str
    acc_mean: float
    acc_std: float
    prec_mean: float
    prec_std: float
    rec_mean: float
    rec_std: float
    f1_mean: float
    f1_std: float
    iterations: int
    failures: int


def rows_from_report(model: str, asset: str, spec, report: ClassificationReport) -> list[ReportRow]:
    """Expand one evaluated model into its four class rows.

    A single test-set pass has no sampling distribution, so the std columns
    are zero and iterations is 1.
    """
    untuned = spec.architecture == "malstm_fcn"
    per_class = {
        "down": report.down,
        "up": report.up,
        "macro_avg": report.macro,
        "weighted_avg": report.weighted,
    }
    rows = []
    for name in CLASS_ROWS:
        m = per_class[name]
        rows.append(
            ReportRow(
                model=model,
                asset=asset,
                architecture=spec.architecture,
                epochs=spec.epochs,
                hidden_layers=None if untuned else spec.hidden_layers,
                batch_size=spec.batch_size,
                optimizer=spec.optimizer,
                activation=None if untuned else spec.activation,
                neurons=None if untuned else spec.neurons,
                class_name=name,
                acc_mean=report.accuracy,
                acc_std=0.0,
                prec_mean=m.precision,
                prec_std=0.0,
                rec_mean=m.recall,
                rec_std=0.0,
                f1_mean=m.f1,
                f1_std=0.0,
                iterations=1,
                failures=0,
            )
        )
    return rows


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_report_csv(rows) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                _cell(v)
                for v in (
                    r.model,
                    r.asset,
                    r.architecture,
                    r.epochs,
                    r.hidden_layers,
                    r.batch_size,
                    r.optimizer,
                    r.activation,
                    r.neurons,
                    r.acc_mean,
                    r.acc_std,
                    r.prec_mean,
                    r.prec_std,
                    r.rec_mean,
                    r.rec_std,
                    r.f1_mean,
                    r.f1_std,
                    r.iterations,
                    r.failures,
                    r.class_name,
                )
            )
        )
    return "\n".join(lines) + "\n"


def render_report_text(rows) -> str:
    """Aligned table grouped by model, asset, and architecture; two-decimal
    metric cells."""
    out = []
    groups: dict[tuple, list[ReportRow]] = {}
    for r in rows:
        groups.setdefault((r.model, r.asset, r.architecture), []).append(r)
    for (model, asset, arch), members in groups.items():
        head = members[0]
        settings = (
            f"epochs={head.epochs} hidden_layers={_cell(head.hidden_layers)} "
            f"batch_size={head.batch_size} optimizer={head.optimizer} "
            f"activation={_cell(head.activation)} neurons={_cell(head.neurons)}"
        )
        out.append(f"{model} / {asset} / {arch}  ({settings})")
        out.append(f"  {'class':<14}{'precision':>10}{'recall':>10}{'f1-score':>10}")
        for r in members:
            out.append(f"  {r.class_name:<14}{r.prec_mean:>10.2f}{r.rec_mean:>10.2f}{r.f1_mean:>10.2f}")
        out.append(f"  {'accuracy':<14}{head.acc_mean:>30.2f}")
        out.append("")
    return "\n".join(out)


def emit_report(rows, csv_path, text_path=None) -> None:
    """Write the evaluation table; the CSV is the machine contract, the text
    rendering mirrors it for humans."""
    rows = list(rows)
    if not rows:
        raise ValueError("report requires at least one row")
    try:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_report_csv(rows))
        if text_path is not None:
            with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(render_report_text(rows))
    except OSError as exc:
        raise OutputError(f"cannot write report: {exc}") from exc
