from __future__ import annotations

import numpy as np

from .base import Classifier, check_fit_input


class GaussianNBClassifier(Classifier):
    def __init__(self, classes, means, variances, log_priors):
        self.classes = classes
        self.n_features = means.shape[1]
        self.means = means
        self.variances = variances
        self.log_priors = log_priors

    def joint_log_likelihood(self, X) -> np.ndarray:
        """``log P(c) + sum_j log N(x_j | mu_cj, var_cj)`` per row and class."""
        X = self._check(X)
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances).sum(axis=1)[None, :]
                     + (((X[:, None, :] - self.means[None]) ** 2) / self.variances[None]).sum(axis=2))
        return ll + self.log_priors[None, :]

    def _predict_index(self, X):
        return np.argmax(self.joint_log_likelihood(X), axis=1)


def fit_gaussian_nb(X, y, var_smoothing: float = 1e-9) -> GaussianNBClassifier:
    """Per-class Gaussian likelihoods; ``var_smoothing * max feature variance`` is added to every variance."""
    X, y, classes, yi = check_fit_input(X, y)
    eps = var_smoothing * float(X.var(axis=0).max())
    if eps <= 0:
        eps = var_smoothing
    means = np.stack([X[yi == k].mean(axis=0) for k in range(classes.size)])
    variances = np.stack([X[yi == k].var(axis=0) for k in range(classes.size)]) + eps
    priors = np.bincount(yi, minlength=classes.size) / yi.size
    return GaussianNBClassifier(classes, means, variances, np.log(priors))
