"""Independent brute-force reference computations used by the tests.

Nothing here imports the code under test; each oracle follows the textbook
definition with explicit loops or dense matrices.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def triangular_filterbank(n_mels, f_min, f_max, nfft, rate):
    """Filter k rises linearly from edge k to edge k+1 and falls to edge k+2."""
    m_lo, m_hi = mel(f_min), mel(f_max)
    edges = [inv_mel(m_lo + (m_hi - m_lo) * i / (n_mels + 1)) for i in range(n_mels + 2)]
    nb = nfft // 2 + 1
    fb = np.zeros((n_mels, nb))
    for k in range(n_mels):
        lo, mid, hi = edges[k], edges[k + 1], edges[k + 2]
        for b in range(nb):
            f = b * rate / nfft
            if lo < f <= mid:
                fb[k, b] = (f - lo) / (mid - lo)
            elif mid < f < hi:
                fb[k, b] = (hi - f) / (hi - mid)
    return fb


def periodic_hann(n):
    return np.array([0.5 - 0.5 * math.cos(2 * math.pi * i / n) for i in range(n)])


@lru_cache(maxsize=4)
def _dft_matrices(nfft):
    n = np.arange(nfft)
    k = np.arange(nfft // 2 + 1)[:, None]
    # exact integer phase reduction keeps the angles in [0, 2 pi)
    ang = 2 * np.pi * ((k * n[None, :]) % nfft) / nfft
    return np.cos(ang), -np.sin(ang)


def dft_power(frames, nfft):
    """|X_k|^2 for k = 0..nfft/2 from the DFT definition, one row per frame."""
    frames = np.atleast_2d(frames)
    x = np.zeros((frames.shape[0], nfft))
    x[:, :frames.shape[1]] = frames
    cos_m, sin_m = _dft_matrices(nfft)
    re = x @ cos_m.T
    im = x @ sin_m.T
    return re * re + im * im


@lru_cache(maxsize=4)
def dct2_matrix(N):
    """Row k: s_k cos(pi k (2n+1) / 2N), s_0 = sqrt(1/N), s_k = sqrt(2/N)."""
    D = np.zeros((N, N))
    for k in range(N):
        s = math.sqrt(1.0 / N) if k == 0 else math.sqrt(2.0 / N)
        for n in range(N):
            D[k, n] = s * math.cos(math.pi * k * (2 * n + 1) / (2 * N))
    return D


def mfcc_oracle(x, rate, n_coeffs=128, n_mels=128, f_min=50.0, f_max=22050.0, frame_len=1103, hop=441,
                nfft=2048, floor=1e-10):
    fb = triangular_filterbank(n_mels, f_min, f_max, nfft, rate)
    win = periodic_hann(frame_len)
    n_frames = 1 + (x.size - frame_len) // hop
    frames = np.array([x[t * hop:t * hop + frame_len] * win for t in range(n_frames)])
    energies = dft_power(frames, nfft) @ fb.T
    logmel = np.log(np.maximum(energies, floor))
    return logmel @ dct2_matrix(n_mels).T[:, :n_coeffs]


def svm_dual_bruteforce(K, y, C):
    """Maximise sum(a) - 0.5 a'Qa over 0 <= a <= C, y'a = 0 by enumerating active sets.

    For each assignment of every variable to {0, C, free}, the free variables
    solve the equality-constrained KKT system; feasible solutions are scored.
    """
    n = y.size
    Q = np.outer(y, y) * K
    best, best_a = -np.inf, None
    for assign in itertools.product((0, 1, 2), repeat=n):
        a = np.array([0.0 if s == 0 else (C if s == 1 else np.nan) for s in assign])
        free = [i for i, s in enumerate(assign) if s == 2]
        fixed = [i for i, s in enumerate(assign) if s != 2]
        if free:
            F = np.array(free)
            af = a[fixed] if fixed else np.zeros(0)
            Fx = np.array(fixed, dtype=int)
            m = len(free)
            # [Q_FF  y_F] [a_F]   [1 - Q_FX a_X]
            # [y_F'   0 ] [nu ] = [ -y_X' a_X   ]
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(F, F)]
            A[:m, m] = y[F]
            A[m, :m] = y[F]
            rhs = np.zeros(m + 1)
            rhs[:m] = 1.0 - (Q[np.ix_(F, Fx)] @ af if fixed else 0.0)
            rhs[m] = -(y[Fx] @ af if fixed else 0.0)
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            a[F] = sol[:m]
        if np.any(a < -1e-9) or np.any(a > C + 1e-9) or abs(y @ a) > 1e-9:
            continue
        a = np.clip(a, 0, C)
        val = a.sum() - 0.5 * a @ Q @ a
        if val > best:
            best, best_a = val, a
    return best, best_a


def gini_counts(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    out = 1.0
    for c in set(labels):
        p = labels.count(c) / n
        out -= p * p
    return out


def best_threshold_bruteforce(x, y):
    """Best midpoint threshold on one feature by weighted child Gini."""
    xs = sorted(set(x))
    best = (math.inf, None)
    for a, b in zip(xs[:-1], xs[1:]):
        thr = (a + b) / 2
        left = [yy for xx, yy in zip(x, y) if xx <= thr]
        right = [yy for xx, yy in zip(x, y) if xx > thr]
        score = (len(left) * gini_counts(left) + len(right) * gini_counts(right)) / len(x)
        if score < best[0] - 1e-15:
            best = (score, thr)
    return best
