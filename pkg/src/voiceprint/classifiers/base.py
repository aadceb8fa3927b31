from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(RuntimeError):
    """A solver failed to produce a usable model."""


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.y)


def check_fit_input(X, y) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Validate training data; return ``X, y, classes, y_index``."""
    data = LabeledDataset(X, y)
    if not np.all(np.isfinite(data.X)):
        raise ValueError("features contain non-finite values")
    classes, y_idx = np.unique(data.y, return_inverse=True)
    if classes.size < 2:
        raise ValueError("need at least two classes to fit")
    return data.X, data.y, classes, y_idx


def scale_gamma(X: np.ndarray) -> float:
    """``1 / (n_features * mean per-feature variance)``; 1.0 for constant data."""
    v = float(X.var(axis=0).mean()) if X.shape[0] > 1 else 0.0
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def rbf_kernel(x, x2, gamma: float) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = np.asarray(x, dtype=np.float64) - np.asarray(x2, dtype=np.float64)
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_gram(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class Classifier:
    """Fitted model interface: ``classes`` plus ``predict``."""

    classes: np.ndarray
    n_features: int

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.size == 0:
            return X.reshape(0, self.n_features)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        if X.shape[0] == 0:
            return self.classes[:0]
        return self.classes[self._predict_index(X)]

    def _predict_index(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Standardized(Classifier):
    """Z-scores features with training-set statistics before delegating to ``inner``."""

    def __init__(self, inner: Classifier, mean: np.ndarray, scale: np.ndarray):
        self.inner, self.mean, self.scale = inner, mean, scale
        self.classes, self.n_features = inner.classes, inner.n_features

    @staticmethod
    def statistics(X) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=np.float64)
        sd = X.std(axis=0)
        return X.mean(axis=0), np.where(sd > 0, sd, 1.0)

    def _predict_index(self, X: np.ndarray) -> np.ndarray:
        return self.inner._predict_index((X - self.mean) / self.scale)


def predict(model: Classifier, X) -> np.ndarray:
    return model.predict(X)
