"""Metrics and the three evaluation experiments."""

from .experiments import (DEFAULT_C_BINS, DEFAULT_TRAIN_GRID, CallTypeConfusion, ComparisonPoint,
                          ComparisonResult, SweepResult, classifier_comparison, confusion_by_calltype,
                          cross_calltype, feature_space_comparison, stratified_subset)
from .metrics import MetricSummary, accuracy, ci95, f1_weighted, sem

__all__ = [
    "DEFAULT_C_BINS", "DEFAULT_TRAIN_GRID", "CallTypeConfusion", "ComparisonPoint", "ComparisonResult",
    "MetricSummary", "SweepResult", "accuracy", "ci95", "classifier_comparison", "confusion_by_calltype",
    "cross_calltype", "f1_weighted", "feature_space_comparison", "sem", "stratified_subset",
]
