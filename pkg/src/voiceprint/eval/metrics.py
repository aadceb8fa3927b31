from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.96


def _check_pair(y_true, y_pred):
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} true vs {y_pred.size} predicted")
    if y_true.size == 0:
        raise ValueError("empty label arrays")
    return y_true, y_pred


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _check_pair(y_true, y_pred)
    return float(np.count_nonzero(y_true == y_pred) / y_true.size)


def f1_weighted(y_true, y_pred) -> float:
    """Support-weighted mean of per-class F1 over the classes present in ``y_true``.

    A class with precision + recall = 0 contributes F1 = 0.
    """
    y_true, y_pred = _check_pair(y_true, y_pred)
    classes, support = np.unique(y_true, return_counts=True)
    total = 0.0
    for c, s in zip(classes, support):
        tp = np.count_nonzero((y_true == c) & (y_pred == c))
        fp = np.count_nonzero((y_true != c) & (y_pred == c))
        fn = s - tp
        denom = 2 * tp + fp + fn
        f1 = 2 * tp / denom if denom else 0.0
        total += s * f1
    return float(total / y_true.size)


def sample_sd(scores) -> float:
    x = np.asarray(scores, dtype=np.float64)
    return float(x.std(ddof=1)) if x.size > 1 else 0.0


def sem(scores) -> float:
    x = np.asarray(scores, dtype=np.float64)
    return sample_sd(x) / math.sqrt(x.size) if x.size > 1 else 0.0


def ci95(scores) -> tuple[float, float]:
    """Normal-approximation interval ``mean +/- 1.96 * SEM``."""
    x = np.asarray(scores, dtype=np.float64)
    if x.size < 2:
        raise ValueError("ci95 needs at least two scores")
    m = float(x.mean())
    h = Z95 * sem(x)
    return m - h, m + h


@dataclass(frozen=True)
class MetricSummary:
    metric: str
    mean: float
    sem: float
    sd: float
    n_replicates: int
    degenerate: bool = False  # a single replicate: sem reported as 0

    @classmethod
    def of(cls, metric: str, scores) -> "MetricSummary":
        x = np.asarray(scores, dtype=np.float64)
        if x.size == 0:
            raise ValueError(f"no scores for {metric}")
        return cls(metric, float(x.mean()), sem(x), sample_sd(x), int(x.size), x.size == 1)

    def to_dict(self) -> dict:
        return {"metric": self.metric, "mean": self.mean, "sem": self.sem, "sd": self.sd,
                "n_replicates": self.n_replicates, "degenerate": self.degenerate}
