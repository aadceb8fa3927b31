"""WAV I/O, resampling and framing."""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal
from scipy.io import wavfile

MIN_RATE = 8000
MAX_RATE = 192000

# Kaiser design target for the anti-alias filter.
STOPBAND_DB = 60.0


class AudioError(ValueError):
    pass


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 1 or s.size == 0:
            raise AudioError("waveform must be a nonempty 1-D array")
        if not MIN_RATE <= int(self.sample_rate_hz) <= MAX_RATE:
            raise AudioError(f"sample rate {self.sample_rate_hz} outside [{MIN_RATE}, {MAX_RATE}]")
        s = s if np.issubdtype(s.dtype, np.floating) else s.astype(np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class FrameSequence:
    frames: np.ndarray
    frame_len: int
    hop: int
    window: str

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def read_wav(path: str | Path) -> Waveform:
    """Read a PCM (16/32-bit int) or IEEE float WAV, averaging channels to mono."""
    path = Path(path)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except (ValueError, wavfile.WavFileWarning, EOFError, struct.error) as exc:
        raise AudioError(f"{path}: unreadable WAV ({exc})") from exc
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        x = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.float32:
        x = data
    else:
        raise AudioError(f"{path}: unsupported sample encoding {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1, dtype=np.float64).astype(x.dtype)
    if x.size == 0:
        raise AudioError(f"{path}: no samples")
    return Waveform(x, int(rate))


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write mono 32-bit IEEE float."""
    wavfile.write(Path(path), w.sample_rate_hz, np.asarray(w.samples, dtype=np.float32))


@lru_cache(maxsize=16)
def _antialias_taps(up: int, down: int) -> np.ndarray:
    # Passband edge at 90% of the narrower Nyquist; stopband reached at that Nyquist.
    m = max(up, down)
    width = 0.1 / m
    numtaps, beta = signal.kaiserord(STOPBAND_DB, width)
    numtaps |= 1
    return signal.firwin(numtaps, 0.95 / m, window=("kaiser", beta))


def resample(w: Waveform, target_hz: int) -> Waveform:
    """Polyphase windowed-sinc resampling.

    Output length is ``round(N * target / source)``.
    """
    if target_hz <= 0:
        raise ValueError("target_hz must be positive")
    if target_hz == w.sample_rate_hz:
        return w
    ratio = Fraction(int(target_hz), w.sample_rate_hz)
    up, down = ratio.numerator, ratio.denominator
    taps = _antialias_taps(up, down)
    y = signal.resample_poly(np.asarray(w.samples, dtype=np.float64), up, down, window=taps)
    n_out = int(round(len(w) * target_hz / w.sample_rate_hz))
    if y.size < n_out:
        y = np.concatenate([y, np.zeros(n_out - y.size)])
    return Waveform(y[:n_out], target_hz)


def window_fn(kind: str, n: int) -> np.ndarray:
    if kind == "rectangular":
        return np.ones(n)
    if kind == "hann":
        # periodic Hann, the usual STFT convention
        return signal.get_window("hann", n, fftbins=True)
    raise ValueError(f"unknown window {kind!r}")


def n_frames_for(n: int, frame_len: int, hop: int) -> int:
    return 0 if n < frame_len else 1 + (n - frame_len) // hop


def frame(w: Waveform | np.ndarray, frame_len: int, hop: int, window: str = "rectangular") -> FrameSequence:
    if frame_len < 1 or hop < 1:
        raise ValueError("frame_len and hop must be >= 1")
    x = np.asarray(w.samples if isinstance(w, Waveform) else w, dtype=np.float64)
    count = n_frames_for(x.size, frame_len, hop)
    if count == 0:
        return FrameSequence(np.zeros((0, frame_len)), frame_len, hop, window)
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    frames = x[idx] * window_fn(window, frame_len)[None, :]
    return FrameSequence(frames, frame_len, hop, window)


def ms_to_samples(ms: float, rate: int) -> int:
    return int(math.floor(ms * rate / 1000.0 + 0.5))
