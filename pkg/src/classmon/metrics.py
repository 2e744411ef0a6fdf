"""Classification metrics: per-class precision/recall/F1, averages, confusion.

Conventions: confusion[i][j] counts items of true class i predicted as j;
0/0 ratios evaluate to 0; the macro average weights classes equally while
the weighted average scales by class support.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset
from .labels import EMOTION_LABELS, N_CLASSES


@dataclass
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class MetricsReport:
    per_class: list[ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    confusion: np.ndarray = field(repr=False)
    total: int = 0


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    mat = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(mat, (yt, yp), 1)
    return mat


def classification_report(y_true, y_pred, labels=EMOTION_LABELS) -> MetricsReport:
    """Compute the full metrics report from true and predicted class codes."""
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.size == 0:
        raise EmptyDataset("cannot evaluate an empty dataset")
    if yt.shape != yp.shape:
        raise EmptyDataset("true and predicted label counts differ")
    n_classes = len(labels)
    mat = confusion_matrix(yt, yp, n_classes)
    per_class = []
    for c in range(n_classes):
        tp = int(mat[c, c])
        fp = int(mat[:, c].sum() - tp)
        fn = int(mat[c, :].sum() - tp)
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class.append(
            ClassMetrics(
                label=labels[c],
                precision=precision,
                recall=recall,
                f1=f1,
                support=int(mat[c, :].sum()),
            )
        )
    supports = np.array([m.support for m in per_class], dtype=np.float64)
    total = int(supports.sum())
    precisions = np.array([m.precision for m in per_class])
    recalls = np.array([m.recall for m in per_class])
    f1s = np.array([m.f1 for m in per_class])
    return MetricsReport(
        per_class=per_class,
        macro_precision=float(precisions.mean()),
        macro_recall=float(recalls.mean()),
        macro_f1=float(f1s.mean()),
        weighted_precision=float((precisions * supports).sum() / total),
        weighted_recall=float((recalls * supports).sum() / total),
        weighted_f1=float((f1s * supports).sum() / total),
        accuracy=float(np.trace(mat) / total),
        confusion=mat,
        total=total,
    )


def evaluate_classifier(model, X, y) -> MetricsReport:
    """Run a fitted classifier over a labeled test set and report metrics."""
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyDataset("cannot evaluate an empty dataset")
    return classification_report(y, model.predict(X))


def format_report(report: MetricsReport) -> str:
    """Render the report as an aligned text table."""
    width = max(len(m.label) for m in report.per_class) + 2
    lines = [f"{'':<{width}}precision  recall  f1-score  support"]
    for m in report.per_class:
        lines.append(
            f"{m.label:<{width}}{m.precision:9.2f}{m.recall:8.2f}{m.f1:10.2f}{m.support:9d}"
        )
    lines.append("")
    lines.append(
        f"{'macro avg':<{width}}{report.macro_precision:9.2f}{report.macro_recall:8.2f}"
        f"{report.macro_f1:10.2f}{report.total:9d}"
    )
    lines.append(
        f"{'weighted avg':<{width}}{report.weighted_precision:9.2f}{report.weighted_recall:8.2f}"
        f"{report.weighted_f1:10.2f}{report.total:9d}"
    )
    lines.append(f"{'accuracy':<{width}}{report.accuracy:9.4f}")
    return "\n".join(lines)
