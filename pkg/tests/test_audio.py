import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.io import wavfile

from voiceprint.audio import AudioError, Waveform, frame, ms_to_samples, n_frames_for, read_wav, resample, \
    window_fn, write_wav


def test_float32_one_second(tmp_path):
    x = np.random.default_rng(0).uniform(-1, 1, 44100).astype(np.float32)
    wavfile.write(tmp_path / "a.wav", 44100, x)
    w = read_wav(tmp_path / "a.wav")
    assert len(w) == 44100 and w.sample_rate_hz == 44100
    assert np.array_equal(w.samples, x)


def test_int16_full_scale(tmp_path):
    wavfile.write(tmp_path / "a.wav", 16000, np.array([-32768, 0, 16384, 32767], dtype=np.int16))
    w = read_wav(tmp_path / "a.wav")
    assert w.samples[0] == -1.0
    assert w.samples[2] == 0.5
    assert w.samples.min() >= -1.0 and w.samples.max() < 1.0


def test_int32_scaling(tmp_path):
    wavfile.write(tmp_path / "a.wav", 16000, np.array([-2 ** 31, 2 ** 30], dtype=np.int32))
    assert read_wav(tmp_path / "a.wav").samples.tolist() == [-1.0, 0.5]


def test_stereo_cancels(tmp_path):
    x = np.random.default_rng(1).uniform(-0.5, 0.5, 1000).astype(np.float32)
    wavfile.write(tmp_path / "a.wav", 22050, np.stack([x, -x], axis=1))
    w = read_wav(tmp_path / "a.wav")
    assert w.samples.shape == (1000,)
    assert np.all(w.samples == 0)


def test_roundtrip_bit_exact(tmp_path):
    x = np.random.default_rng(2).standard_normal(777).astype(np.float32)
    write_wav(tmp_path / "a.wav", Waveform(x, 48000))
    w = read_wav(tmp_path / "a.wav")
    assert w.sample_rate_hz == 48000
    assert w.samples.dtype == np.float32 and np.array_equal(w.samples, x)


def test_truncated_header(tmp_path):
    write_wav(tmp_path / "a.wav", Waveform(np.zeros(100, np.float32), 16000))
    (tmp_path / "b.wav").write_bytes((tmp_path / "a.wav").read_bytes()[:20])
    with pytest.raises(AudioError):
        read_wav(tmp_path / "b.wav")


def test_unsupported_encoding(tmp_path):
    wavfile.write(tmp_path / "a.wav", 16000, np.zeros(10, dtype=np.uint8))
    with pytest.raises(AudioError, match="unsupported"):
        read_wav(tmp_path / "a.wav")


def test_waveform_validation():
    with pytest.raises(AudioError):
        Waveform(np.zeros(0), 16000)
    with pytest.raises(AudioError):
        Waveform(np.zeros(10), 4000)
    with pytest.raises(AudioError):
        Waveform(np.zeros(10), 400000)


def test_resample_length_and_identity():
    x = np.random.default_rng(3).standard_normal(44100)
    w = Waveform(x, 44100)
    assert len(resample(w, 16000)) == 16000
    same = resample(w, 44100)
    assert np.array_equal(same.samples, x)


@settings(max_examples=40, deadline=None)
@given(st.integers(100, 5000), st.sampled_from([8000, 16000, 22050, 44100, 48000]),
       st.sampled_from([8000, 16000, 22050, 44100, 48000]))
def test_resample_length_property(n, src, dst):
    out = resample(Waveform(np.ones(n), src), dst)
    assert len(out) == round(n * dst / src)


def _dft_peak(x, rate):
    # direct DFT magnitude on a 1 Hz grid around the expected peak
    n = np.arange(x.size)
    freqs = np.arange(900, 1101)
    mags = np.abs(np.exp(-2j * np.pi * freqs[:, None] * n[None, :] / rate) @ x) * 2 / x.size
    k = int(np.argmax(mags))
    return freqs[k], mags[k]


def test_resample_preserves_tone():
    t = np.arange(44100) / 44100
    y = resample(Waveform(np.sin(2 * np.pi * 1000 * t), 44100), 16000).samples
    core = y[2000:14000]
    f, amp = _dft_peak(core, 16000)
    assert abs(f - 1000) <= 1  # one DFT bin at this length
    assert amp == pytest.approx(1.0, rel=0.01)


def test_resample_rejects_above_new_nyquist():
    t = np.arange(44100) / 44100
    y = resample(Waveform(np.sin(2 * np.pi * 10000 * t), 44100), 16000).samples
    rms = np.sqrt(np.mean(y[2000:14000] ** 2))
    assert 20 * np.log10(rms / np.sqrt(0.5)) < -60


def test_frame_counts():
    assert n_frames_for(1103, 1103, 441) == 1
    assert n_frames_for(1102, 1103, 441) == 0
    assert frame(np.zeros(1102), 1103, 441).n_frames == 0
    assert frame(np.zeros(44100), 1103, 441).n_frames == 98
    assert ms_to_samples(25, 44100) == 1103
    assert ms_to_samples(10, 44100) == 441


def test_hann_on_constant_signal():
    fs = frame(np.ones(3000), 1103, 441, "hann")
    for row in fs.frames:
        assert np.array_equal(row, window_fn("hann", 1103))
    assert window_fn("hann", 8)[0] == 0.0
    assert window_fn("hann", 8)[4] == pytest.approx(1.0)


def test_frame_contents():
    x = np.arange(10.0)
    fs = frame(x, 4, 3)
    assert fs.frames.tolist() == [[0, 1, 2, 3], [3, 4, 5, 6], [6, 7, 8, 9]]
