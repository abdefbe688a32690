"""Confusion counts and classification scores.

The positive class is the fake fingerprint (+1), so recall measures the
fraction of fakes caught.  Ratios with a zero denominator are undefined
and carried as ``None`` (rendered "-" in reports), never as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ConfusionMatrix", "Scores", "confusion", "format_score", "scores"]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Scores:
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


def confusion(truth, pred) -> ConfusionMatrix:
    """Count outcomes of predictions against ground truth (labels in {-1, +1})."""
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred):
        raise ValueError(f"{len(truth)} truth labels vs {len(pred)} predictions")
    if not truth:
        raise ValueError("cannot build a confusion matrix from no samples")
    tp = tn = fp = fn = 0
    for t, p in zip(truth, pred):
        if t not in (-1, 1) or p not in (-1, 1):
            raise ValueError(f"labels must be -1 or +1, got truth={t}, pred={p}")
        if t == 1 and p == 1:
            tp += 1
        elif t == -1 and p == -1:
            tn += 1
        elif t == -1 and p == 1:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def scores(cm: ConfusionMatrix) -> Scores:
    """Accuracy, precision, recall, F1 from confusion counts."""
    if cm.total <= 0:
        raise ValueError("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else None
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return Scores(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


def format_score(value: float | None) -> str:
    """Render a score to 4 decimal places, or "-" when undefined."""
    return "-" if value is None else f"{value:.4f}"
