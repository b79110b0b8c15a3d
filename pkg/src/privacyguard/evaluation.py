"""Confusion-matrix construction and the derived classification metrics.

Label 1 (invasive) is the positive class throughout. Ratios with a zero
denominator are reported as None instead of being coerced to 0, so "no
positives existed" stays distinguishable from "found none".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: Optional[float]
    recall: Optional[float]
    specificity: Optional[float]
    f1: Optional[float]


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    """Count TP/TN/FP/FN over paired 0/1 labels and predictions."""
    y_true, y_pred = list(y_true), list(y_pred)
    if not y_true:
        raise ValueError("cannot evaluate an empty prediction set")
    if len(y_true) != len(y_pred):
        raise ValueError(f"{len(y_true)} labels but {len(y_pred)} predictions")
    for value in y_true + y_pred:
        if value not in (0, 1):
            raise ValueError(f"labels and predictions must be 0 or 1, got {value!r}")
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 1)
    tn = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 0)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 0)
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """Accuracy, precision, recall, specificity, and F1 from the counts.

    F1 is the harmonic mean of precision and recall; it is None whenever
    either part is undefined or both are zero.
    """
    if cm.total <= 0:
        raise ValueError("confusion matrix has no samples")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return Metrics(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        f1=f1,
    )


def metrics_report(model_kind: str, cm: ConfusionMatrix, metrics: Metrics) -> dict:
    """JSON-ready evaluation record: counts first, then the derived scores."""
    return {
        "model": model_kind,
        "tp": cm.tp,
        "tn": cm.tn,
        "fp": cm.fp,
        "fn": cm.fn,
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "specificity": metrics.specificity,
        "f1": metrics.f1,
    }
