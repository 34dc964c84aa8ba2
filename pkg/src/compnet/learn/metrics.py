from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .tree import N_CLASSES


@dataclass
class MetricsReport:
    """Accuracy plus macro precision / recall / F1.

    Macro averages run over the classes present in ``y_true``; a per-class
    precision with no predictions of that class counts as 0.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: list[list[int]]
    support: list[int]
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)), 1)
    return cm


def classification_metrics(y_true, y_pred, n_classes: int = N_CLASSES) -> MetricsReport:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("metrics need at least one prediction")
    cm = confusion_matrix(y_true, y_pred, n_classes)
    tp = np.diag(cm).astype(float)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    present = support > 0

    precision = np.divide(tp, predicted, out=np.zeros(n_classes), where=predicted > 0)
    recall = np.divide(tp, support, out=np.zeros(n_classes), where=support > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_classes), where=denom > 0)
    return MetricsReport(
        accuracy=float(tp.sum() / y_true.size),
        precision=float(precision[present].mean()),
        recall=float(recall[present].mean()),
        f1=float(f1[present].mean()),
        confusion=cm.tolist(),
        support=support.tolist(),
        n=int(y_true.size),
    )


def majority_baseline(y_true, n_classes: int = N_CLASSES) -> MetricsReport:
    """Metrics of always predicting the most frequent class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    majority = int(np.argmax(np.bincount(y_true, minlength=n_classes)))
    return classification_metrics(y_true, np.full_like(y_true, majority), n_classes)
