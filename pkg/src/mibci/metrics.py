"""Multiclass agreement metrics from a confusion matrix.

All metric values are fractions (accuracy in [0, 1], kappa in [-1, 1]);
report rows convert to percentages at the presentation layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def confusion(y_true, y_pred, n_classes: int = 4) -> np.ndarray:
    """Count matrix with rows = true class, columns = predicted class.

    Labels are 1-based in [1, n_classes].
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(
            f"length mismatch: {y_true.shape} true vs {y_pred.shape} predicted"
        )
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if arr.size and (arr.min() < 1 or arr.max() > n_classes):
            raise ValueError(f"{name} labels must lie in [1, {n_classes}]")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true - 1, y_pred - 1), 1)
    return cm


@dataclass(frozen=True)
class MetricValues:
    """Fractional metrics; multiply by 100 for table form."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    kappa: float

    def as_percentages(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy * 100.0,
            "precision": self.precision * 100.0,
            "recall": self.recall * 100.0,
            "f1": self.f1 * 100.0,
            "kappa": self.kappa * 100.0,
        }


def metrics(cm: np.ndarray) -> MetricValues:
    """Accuracy, macro precision/recall/F1, and chance-corrected kappa.

    Per-class ratios use the 0/0 -> 0 convention; kappa is
    (p_o - p_e) / (1 - p_e) with p_e from the row/column marginals and
    is undefined (raises) when p_e = 1.
    """
    cm = np.asarray(cm, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got {cm.shape}")
    total = cm.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")

    diag = np.diag(cm)
    row = cm.sum(axis=1)
    col = cm.sum(axis=0)

    accuracy = diag.sum() / total
    with np.errstate(invalid="ignore", divide="ignore"):
        precision_c = np.where(col > 0, diag / col, 0.0)
        recall_c = np.where(row > 0, diag / row, 0.0)
        denom = precision_c + recall_c
        f1_c = np.where(denom > 0, 2.0 * precision_c * recall_c / denom, 0.0)

    p_o = accuracy
    p_e = float((row * col).sum() / total**2)
    if p_e >= 1.0:
        raise ValueError(
            "kappa is undefined: expected agreement is 1 (all mass in one "
            "row/column pair)"
        )
    kappa = (p_o - p_e) / (1.0 - p_e)

    return MetricValues(
        accuracy=float(accuracy),
        precision=float(precision_c.mean()),
        recall=float(recall_c.mean()),
        f1=float(f1_c.mean()),
        kappa=float(kappa),
    )
