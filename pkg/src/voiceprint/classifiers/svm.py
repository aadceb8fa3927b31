"""RBF-kernel SVM: one-vs-one machines solved by SMO with second-order working-set selection."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .base import Classifier, FitError, check_fit_input, rbf_gram, scale_gamma

TAU = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    gamma: float | str = "scale"
    tolerance: float = 1e-3
    max_iter: int = 100_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.gamma != "scale" and not float(self.gamma) > 0:
            raise ValueError("gamma must be positive or 'scale'")


@dataclass
class BinarySolution:
    alpha: np.ndarray
    rho: float
    gap: float  # m(alpha) - M(alpha) at termination
    iterations: int


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """``sum(alpha) - 0.5 * alpha' Q alpha`` with ``Q = y y' * K``."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 100_000) -> BinarySolution:
    """Solve ``min 0.5 a'Qa - e'a`` s.t. ``0 <= a <= C``, ``y'a = 0`` for labels in {-1, +1}.

    Stops when the maximal violating pair gap ``m - M`` drops to ``tol``.
    """
    n = y.size
    y = y.astype(np.float64)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(Q).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0
    it = 0
    while True:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * G
        if not up.any() or not low.any():
            gap = 0.0
            break
        s_up = np.where(up, score, -np.inf)
        i = int(np.argmax(s_up))
        m = s_up[i]
        M = float(np.min(np.where(low, score, np.inf)))
        gap = m - M
        if gap <= tol or it >= max_iter:
            break
        # second-order choice of j among violators in I_low
        b = m - score
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, TAU)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            quad = max(Q[i, i] + Q[j, j] + 2.0 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2.0 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        G += Q[i] * (ai - ai_old) + Q[j] * (aj - aj_old)
        it += 1

    if it >= max_iter and gap > tol:
        raise FitError(f"SMO did not converge in {max_iter} iterations (gap {gap:.3g})")
    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(-score[free].mean())
    else:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        hi = np.max(score[up]) if up.any() else 0.0
        lo = np.min(score[low]) if low.any() else 0.0
        rho = float(-(hi + lo) / 2.0)
    return BinarySolution(alpha, rho, float(gap), it)


def kkt_violation(alpha: np.ndarray, y: np.ndarray, K: np.ndarray, C: float) -> float:
    """Maximal violating-pair gap ``m(alpha) - M(alpha)``, clipped at 0."""
    G = (y[:, None] * y[None, :] * K) @ alpha - 1.0
    score = -y * G
    pos = y > 0
    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    if not up.any() or not low.any():
        return 0.0
    return max(0.0, float(score[up].max() - score[low].min()))


@dataclass(frozen=True)
class PairMachine:
    pos: int
    neg: int
    support: np.ndarray  # indices into the training set
    coef: np.ndarray  # alpha * y on the support
    rho: float
    kkt_gap: float


class SvmClassifier(Classifier):
    def __init__(self, X, classes, gamma, C, machines):
        self.X_train = X
        self.classes = classes
        self.n_features = X.shape[1]
        self.gamma = gamma
        self.C = C
        self.machines = machines

    @property
    def max_kkt_gap(self) -> float:
        return max(m.kkt_gap for m in self.machines)

    def decision_pairs(self, X: np.ndarray) -> np.ndarray:
        K = rbf_gram(X, self.X_train, self.gamma)
        return np.stack([K[:, m.support] @ m.coef - m.rho for m in self.machines], axis=1)

    def _predict_index(self, X):
        dec = self.decision_pairs(X)
        votes = np.zeros((X.shape[0], self.classes.size), dtype=np.int64)
        for col, m in enumerate(self.machines):
            win = np.where(dec[:, col] > 0, m.pos, m.neg)
            np.add.at(votes, (np.arange(X.shape[0]), win), 1)
        return np.argmax(votes, axis=1)  # first maximum = lowest class index


def fit_svm(X, y, config: SvmConfig = SvmConfig()) -> SvmClassifier:
    X, y, classes, yi = check_fit_input(X, y)
    gamma = scale_gamma(X) if config.gamma == "scale" else float(config.gamma)
    K = rbf_gram(X, X, gamma)
    machines = []
    for a, b in combinations(range(classes.size), 2):
        idx = np.flatnonzero((yi == a) | (yi == b))
        yy = np.where(yi[idx] == a, 1.0, -1.0)
        sol = smo_solve(K[np.ix_(idx, idx)], yy, config.C, config.tolerance, config.max_iter)
        sv = sol.alpha > 0
        machines.append(PairMachine(a, b, idx[sv], sol.alpha[sv] * yy[sv], sol.rho, sol.gap))
    return SvmClassifier(X, classes, gamma, config.C, machines)
