"""Binary classification metrics. Class 1 is the positive class."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def precision_score(tp: int, fp: int) -> float:
    return tp / (tp + fp) if tp + fp else 0.0


def recall_score(tp: int, fn: int) -> float:
    return tp / (tp + fn) if tp + fn else 0.0


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float

    @staticmethod
    def from_counts(tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        p = precision_score(tp, fp)
        r = recall_score(tp, fn)
        return Metrics(tp, fp, fn, tn, p, r, f1_score(p, r))


def evaluate(y_true, y_pred) -> Metrics:
    t = np.asarray(y_true).astype(int)
    p = np.asarray(y_pred).astype(int)
    if t.shape != p.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {p.shape}")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    tn = int(np.sum((t == 0) & (p == 0)))
    return Metrics.from_counts(tp, fp, fn, tn)
