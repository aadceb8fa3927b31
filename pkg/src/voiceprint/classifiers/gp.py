"""Gaussian-process classification, logistic likelihood, Laplace approximation.

Multi-class problems are handled one-vs-rest: one binary GP per class, and
the class with the highest predictive probability wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import expit

from .base import Classifier, FitError, check_fit_input, rbf_gram, scale_gamma


class GpConvergenceError(FitError):
    pass


@dataclass
class BinaryLaplace:
    f_hat: np.ndarray
    grad_loglik: np.ndarray  # t - pi at the mode
    sqrt_w: np.ndarray
    chol: np.ndarray  # lower Cholesky factor of I + W^1/2 K W^1/2
    iterations: int


def laplace_mode(K: np.ndarray, y: np.ndarray, max_iter: int = 50, tol: float = 1e-6) -> BinaryLaplace:
    """Newton iterations for the posterior mode with labels ``y`` in {-1, +1}.

    Converged once the update of the latent vector has norm below ``tol``.
    """
    n = y.size
    t = (y + 1) / 2.0
    f = np.zeros(n)
    eye = np.eye(n)
    for it in range(1, max_iter + 1):
        pi = expit(f)
        w = pi * (1.0 - pi)
        sw = np.sqrt(w)
        L = cholesky(eye + sw[:, None] * K * sw[None, :], lower=True)
        b = w * f + (t - pi)
        a = b - sw * cho_solve((L, True), sw * (K @ b))
        f_new = K @ a
        step = float(np.linalg.norm(f_new - f))
        f = f_new
        if step < tol:
            pi = expit(f)
            w = pi * (1.0 - pi)
            sw = np.sqrt(w)
            L = cholesky(eye + sw[:, None] * K * sw[None, :], lower=True)
            return BinaryLaplace(f, t - pi, sw, L, it)
    raise GpConvergenceError(f"Laplace Newton iterations did not converge in {max_iter} steps")


def predictive_probability(model: BinaryLaplace, k_star: np.ndarray, k_diag: np.ndarray) -> np.ndarray:
    """P(y=+1 | x*) using the probit approximation to the logistic-Gaussian integral."""
    mean = k_star @ model.grad_loglik
    v = solve_triangular(model.chol, (model.sqrt_w[:, None] * k_star.T), lower=True)
    var = np.maximum(k_diag - (v * v).sum(axis=0), 0.0)
    kappa = 1.0 / np.sqrt(1.0 + np.pi * var / 8.0)
    return expit(kappa * mean)


class GpLaplaceClassifier(Classifier):
    def __init__(self, X, classes, gamma, signal_variance, binaries):
        self.X_train = X
        self.classes = classes
        self.n_features = X.shape[1]
        self.gamma = gamma
        self.signal_variance = signal_variance
        self.binaries = binaries

    def predict_proba(self, X) -> np.ndarray:
        """One-vs-rest probabilities, one column per class (not renormalized)."""
        X = self._check(X)
        k_star = self.signal_variance * rbf_gram(X, self.X_train, self.gamma)
        k_diag = np.full(X.shape[0], self.signal_variance)
        return np.stack([predictive_probability(b, k_star, k_diag) for b in self.binaries], axis=1)

    def _predict_index(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def fit_gp_laplace(X, y, gamma: float | str = "scale", signal_variance: float = 1.0,
                   newton_max_iter: int = 50, tol: float = 1e-6) -> GpLaplaceClassifier:
    X, y, classes, yi = check_fit_input(X, y)
    g = scale_gamma(X) if gamma == "scale" else float(gamma)
    K = signal_variance * rbf_gram(X, X, g)
    if classes.size == 2:
        # one machine decides both sides; keep two columns for a uniform predict
        b = laplace_mode(K, np.where(yi == 1, 1.0, -1.0), newton_max_iter, tol)
        neg = BinaryLaplace(-b.f_hat, -b.grad_loglik, b.sqrt_w, b.chol, b.iterations)
        binaries = [neg, b]
    else:
        binaries = [laplace_mode(K, np.where(yi == k, 1.0, -1.0), newton_max_iter, tol)
                    for k in range(classes.size)]
    return GpLaplaceClassifier(X, classes, g, signal_variance, binaries)
