"""The four shallow classifiers behind one fit/predict contract."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .base import Classifier, FitError, LabeledDataset, Standardized, predict, rbf_gram, rbf_kernel, scale_gamma
from .forest import RandomForestClassifier, fit_random_forest
from .gp import GpConvergenceError, GpLaplaceClassifier, fit_gp_laplace
from .naive_bayes import GaussianNBClassifier, fit_gaussian_nb
from .svm import SvmClassifier, SvmConfig, fit_svm

KINDS = ("svm", "rf", "nb", "gp")


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    name: str | None = None
    standardize: bool = False  # z-score features with training statistics

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; choose from {KINDS}")

    @property
    def label(self) -> str:
        return self.name or self.kind

    def fit(self, X, y, seed: int = 0) -> Classifier:
        if self.standardize:
            mean, scale = Standardized.statistics(X)
            inner = replace(self, standardize=False).fit((np.asarray(X, dtype=np.float64) - mean) / scale, y, seed)
            return Standardized(inner, mean, scale)
        p = dict(self.params)
        if self.kind == "svm":
            return fit_svm(X, y, SvmConfig(**p))
        if self.kind == "rf":
            return fit_random_forest(X, y, seed=seed, **p)
        if self.kind == "nb":
            return fit_gaussian_nb(X, y, **p)
        return fit_gp_laplace(X, y, **p)


DEFAULT_SPECS = (
    ClassifierSpec("svm", {"C": 1.0}),
    ClassifierSpec("rf", {"n_trees": 100}),
    ClassifierSpec("nb"),
    ClassifierSpec("gp"),
)

__all__ = [
    "Classifier", "ClassifierSpec", "DEFAULT_SPECS", "FitError", "GaussianNBClassifier", "GpConvergenceError",
    "GpLaplaceClassifier", "KINDS", "LabeledDataset", "RandomForestClassifier", "Standardized", "SvmClassifier", "SvmConfig",
    "fit_gaussian_nb", "fit_gp_laplace", "fit_random_forest", "fit_svm", "predict", "rbf_gram", "rbf_kernel",
    "scale_gamma",
]
