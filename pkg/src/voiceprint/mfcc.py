"""Mel-frequency cepstral coefficients at native sample rate."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct, rfft

from .audio import Waveform, frame, ms_to_samples

FEATURE_DIM = 128


@dataclass(frozen=True)
class MfccConfig:
    n_coeffs: int = 128
    n_mels: int = 128
    f_min_hz: float = 50.0
    f_max_hz: float = 22050.0
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int | None = None  # None: next power of two >= frame length
    log_floor: float = 1e-10
    window: str = "hann"

    def __post_init__(self):
        if self.n_coeffs > self.n_mels:
            raise ValueError("n_coeffs must not exceed n_mels")
        if not 0 <= self.f_min_hz < self.f_max_hz:
            raise ValueError("need 0 <= f_min_hz < f_max_hz")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def frame_len(self, rate: int) -> int:
        return ms_to_samples(self.frame_ms, rate)

    def hop(self, rate: int) -> int:
        return ms_to_samples(self.hop_ms, rate)

    def nfft(self, rate: int) -> int:
        n = self.frame_len(rate)
        if self.fft_size is not None:
            if self.fft_size < n or self.fft_size & (self.fft_size - 1):
                raise ValueError(f"fft_size must be a power of two >= frame length {n}")
            return self.fft_size
        return 1 << (n - 1).bit_length()

    def check_rate(self, rate: int) -> None:
        if self.f_max_hz > rate / 2:
            raise ValueError(f"f_max_hz {self.f_max_hz} exceeds Nyquist {rate / 2} for rate {rate}")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: MfccConfig, fft_size: int, sample_rate: int) -> np.ndarray:
    """Triangular filters, ``n_mels x (fft_size // 2 + 1)``.

    Edges are equally spaced in mel between ``f_min`` and ``f_max``; each
    triangle is evaluated at the FFT bin centre frequencies, so a filter
    narrower than the bin spacing would come out empty and is rejected.
    """
    config.check_rate(sample_rate)
    return _filterbank(config.n_mels, config.f_min_hz, config.f_max_hz, fft_size, sample_rate).copy()


@lru_cache(maxsize=8)
def _filterbank(n_mels, f_min, f_max, fft_size, sample_rate):
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs[None, :] - lo) / (mid - lo)
    falling = (hi - freqs[None, :]) / (hi - mid)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    empty = np.flatnonzero(fb.max(axis=1) <= 0)
    if empty.size:
        raise ValueError(f"mel filters {empty.tolist()} cover no FFT bin; use a larger fft_size")
    fb.setflags(write=False)
    return fb


def power_spectrum(frames: np.ndarray, nfft: int) -> np.ndarray:
    spec = rfft(frames, n=nfft, axis=-1)
    return spec.real ** 2 + spec.imag ** 2


def mfcc_sequence(w: Waveform, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """Frame-level MFCCs, shape ``(n_frames, n_coeffs)``."""
    rate = w.sample_rate_hz
    config.check_rate(rate)
    flen, hop, nfft = config.frame_len(rate), config.hop(rate), config.nfft(rate)
    frames = frame(w, flen, hop, config.window).frames
    if frames.shape[0] == 0:
        raise ValueError(f"waveform of {len(w)} samples is shorter than one {flen}-sample frame")
    fb = _filterbank(config.n_mels, config.f_min_hz, config.f_max_hz, nfft, rate)
    energies = power_spectrum(frames, nfft) @ fb.T
    logmel = np.log(np.maximum(energies, config.log_floor))
    return dct(logmel, type=2, norm="ortho", axis=-1)[:, : config.n_coeffs]


def mean_pool(seq) -> np.ndarray:
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise ValueError("mean_pool needs a nonempty (n_frames, dim) sequence")
    return seq.mean(axis=0)


def mfcc_features(w: Waveform, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """One pooled vector per snippet."""
    return mean_pool(mfcc_sequence(w, config))
