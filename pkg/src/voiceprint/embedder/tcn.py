"""Residual temporal convolutional identity embedder (numpy, manual backprop).

Layout is ``(batch, time, channels)`` throughout.  The network:

* encoder: causal strided convolution over raw 16 kHz samples
  (``encoder_kernel`` taps, stride ``encoder_stride``), ReLU, then
  ``log1p`` compression when ``log_compress`` is set
* ``n_blocks`` residual blocks, each two causal dilated convolutions:
  ``out = relu(h + conv2(relu(conv1(h))))``
* head: causal Conv1D mapping ``channels -> embed_dim``
* emission: head outputs averaged over each non-overlapping
  ``frame_hop_samples`` window, optionally L2-normalized.

Every output step depends only on samples at or before the end of its
window, so appending audio never changes earlier vectors.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..audio import Waveform
from ..seeding import rng_for

EMBED_DIM = 128
SAMPLE_RATE = 16000


@dataclass(frozen=True)
class TcnConfig:
    n_blocks: int = 4
    channels: int = 64
    kernel_size: int = 3
    dilations: tuple[int, ...] = (1, 2, 4, 8)
    frame_hop_samples: int = 1024
    embed_dim: int = EMBED_DIM
    l2_normalize_output: bool = True
    encoder_kernel: int = 128
    encoder_stride: int = 64
    head_kernel: int = 3
    log_compress: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        if self.embed_dim != EMBED_DIM:
            raise ValueError(f"embed_dim must be {EMBED_DIM}, got {self.embed_dim}")
        if self.frame_hop_samples != int(0.064 * SAMPLE_RATE):
            raise ValueError("frame_hop_samples must be 1024 (64 ms at 16 kHz)")
        if len(self.dilations) != self.n_blocks:
            raise ValueError("need one dilation per block")
        if self.frame_hop_samples % self.encoder_stride:
            raise ValueError("encoder_stride must divide frame_hop_samples")
        if self.encoder_kernel < self.encoder_stride:
            raise ValueError("encoder_kernel must be >= encoder_stride")
        if min(self.channels, self.kernel_size, self.head_kernel, *self.dilations) < 1:
            raise ValueError("sizes must be positive")

    @property
    def steps_per_frame(self) -> int:
        return self.frame_hop_samples // self.encoder_stride

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dilations"] = list(self.dilations)
        return d

    def param_shapes(self) -> "OrderedDict[str, tuple[int, ...]]":
        """Parameter names and shapes in their canonical (serialization) order."""
        c, k = self.channels, self.kernel_size
        shapes = OrderedDict()
        shapes["encoder.W"] = (self.encoder_kernel, c)
        shapes["encoder.b"] = (c,)
        for i in range(self.n_blocks):
            for j in (1, 2):
                shapes[f"block{i}.conv{j}.W"] = (k * c, c)
                shapes[f"block{i}.conv{j}.b"] = (c,)
        shapes["head.W"] = (self.head_kernel * c, self.embed_dim)
        shapes["head.b"] = (self.embed_dim,)
        return shapes


@dataclass
class ModelWeights:
    config: TcnConfig
    params: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    def copy(self, dtype=None) -> "ModelWeights":
        return ModelWeights(self.config, OrderedDict(
            (k, v.astype(dtype or v.dtype, copy=True)) for k, v in self.params.items()))

    @property
    def n_params(self) -> int:
        return sum(v.size for v in self.params.values())


def init_weights(config: TcnConfig = TcnConfig(), seed: int = 0) -> ModelWeights:
    """Fan-in scaled (He) normal init; biases zero.  Float32."""
    rng = rng_for(seed, "embedder/init")
    params = OrderedDict()
    for name, shape in config.param_shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape, dtype=np.float32)
            continue
        fan_in = shape[0]
        scale = np.sqrt(2.0 / fan_in)
        if name.endswith("conv2.W"):
            scale *= 0.5  # keep the residual branch small at init
        if name == "head.W":
            scale = np.sqrt(1.0 / fan_in)
        params[name] = (rng.standard_normal(shape) * scale).astype(np.float32)
    return ModelWeights(config, params)


# ---------------------------------------------------------------------------
# layers


def _causal_conv(x, W, b, k, d):
    bsz, t, c = x.shape
    pad = (k - 1) * d
    xp = np.concatenate([np.zeros((bsz, pad, c), dtype=x.dtype), x], axis=1) if pad else x
    cols = np.concatenate([xp[:, i * d:i * d + t, :] for i in range(k)], axis=2)
    out = cols.reshape(bsz * t, k * c) @ W + b
    return out.reshape(bsz, t, -1), cols


def _causal_conv_backward(dout, cols, W, k, d, c):
    bsz, t, cout = dout.shape
    g = dout.reshape(bsz * t, cout)
    dW = cols.reshape(bsz * t, -1).T @ g
    db = g.sum(axis=0)
    dcols = (g @ W.T).reshape(bsz, t, k, c)
    pad = (k - 1) * d
    dxp = np.zeros((bsz, t + pad, c), dtype=dout.dtype)
    for i in range(k):
        dxp[:, i * d:i * d + t, :] += dcols[:, :, i, :]
    return dxp[:, pad:, :], dW, db


def _encoder_frames(x, cfg: TcnConfig):
    """Sliding encoder windows, shape ``(batch, steps, encoder_kernel)``."""
    bsz, n = x.shape
    steps = n // cfg.encoder_stride
    pad = cfg.encoder_kernel - cfg.encoder_stride
    xp = np.concatenate([np.zeros((bsz, pad), dtype=x.dtype), x[:, :steps * cfg.encoder_stride]], axis=1)
    win = sliding_window_view(xp, cfg.encoder_kernel, axis=1)[:, ::cfg.encoder_stride, :]
    return win[:, :steps, :]


def forward_batch(params, cfg: TcnConfig, x: np.ndarray, keep_cache: bool = False):
    """Frame-level identity vectors for equal-length inputs ``x`` of shape (batch, samples).

    Returns ``(vectors, cache)`` with vectors shaped ``(batch, n_frames, embed_dim)``.
    """
    n_frames = x.shape[1] // cfg.frame_hop_samples
    if n_frames == 0:
        raise ValueError(f"too short: need at least {cfg.frame_hop_samples} samples, got {x.shape[1]}")
    cache = {}
    # only steps that land inside a complete frame are needed
    x = x[:, :n_frames * cfg.frame_hop_samples]
    frames = _encoder_frames(x, cfg)
    bsz, steps, _ = frames.shape
    pre = frames.reshape(bsz * steps, -1) @ params["encoder.W"] + params["encoder.b"]
    h = np.maximum(pre, 0)
    if cfg.log_compress:
        h = np.log1p(h)
    h = h.reshape(bsz, steps, -1)
    if keep_cache:
        cache["enc_frames"] = frames
        mask = (pre > 0).astype(pre.dtype)
        if cfg.log_compress:
            mask = mask / (1.0 + np.maximum(pre, 0))
        cache["enc_mask"] = mask.reshape(bsz, steps, -1)
    k, c = cfg.kernel_size, cfg.channels
    for i, d in enumerate(cfg.dilations):
        a1, cols1 = _causal_conv(h, params[f"block{i}.conv1.W"], params[f"block{i}.conv1.b"], k, d)
        r1 = np.maximum(a1, 0)
        a2, cols2 = _causal_conv(r1, params[f"block{i}.conv2.W"], params[f"block{i}.conv2.b"], k, d)
        s = h + a2
        out = np.maximum(s, 0)
        if keep_cache:
            cache[f"block{i}"] = (cols1, a1 > 0, cols2, s > 0)
        h = out
    z, colsh = _causal_conv(h, params["head.W"], params["head.b"], cfg.head_kernel, 1)
    spf = cfg.steps_per_frame
    u = z.reshape(bsz, n_frames, spf, cfg.embed_dim).mean(axis=2)
    if cfg.l2_normalize_output:
        norm = np.sqrt((u * u).sum(axis=-1, keepdims=True))
        norm = np.maximum(norm, np.finfo(u.dtype).tiny)
        v = u / norm
    else:
        norm, v = None, u
    if keep_cache:
        cache["head_cols"] = colsh
        cache["u_norm"] = norm
        cache["v"] = v
        cache["shape"] = (bsz, steps, n_frames)
    return v, cache


def backward_batch(params, cfg: TcnConfig, cache, dv: np.ndarray) -> "OrderedDict[str, np.ndarray]":
    """Gradients of a scalar loss w.r.t. every parameter given ``dL/dvectors``."""
    bsz, steps, n_frames = cache["shape"]
    grads = OrderedDict()
    if cfg.l2_normalize_output:
        v = cache["v"]
        du = (dv - v * (v * dv).sum(axis=-1, keepdims=True)) / cache["u_norm"]
    else:
        du = dv
    spf = cfg.steps_per_frame
    dz = np.broadcast_to(du[:, :, None, :] / spf, (bsz, n_frames, spf, cfg.embed_dim))
    dz = dz.reshape(bsz, steps, cfg.embed_dim)
    c, k = cfg.channels, cfg.kernel_size
    dh, grads["head.W"], grads["head.b"] = _causal_conv_backward(
        dz, cache["head_cols"], params["head.W"], cfg.head_kernel, 1, c)
    for i in reversed(range(cfg.n_blocks)):
        d = cfg.dilations[i]
        cols1, m1, cols2, ms = cache[f"block{i}"]
        ds = dh * ms
        dr1, grads[f"block{i}.conv2.W"], grads[f"block{i}.conv2.b"] = _causal_conv_backward(
            ds, cols2, params[f"block{i}.conv2.W"], k, d, c)
        da1 = dr1 * m1
        dx1, grads[f"block{i}.conv1.W"], grads[f"block{i}.conv1.b"] = _causal_conv_backward(
            da1, cols1, params[f"block{i}.conv1.W"], k, d, c)
        dh = ds + dx1
    dpre = (dh * cache["enc_mask"]).reshape(bsz * steps, c)
    frames = cache["enc_frames"].reshape(bsz * steps, -1)
    grads["encoder.W"] = frames.T @ dpre
    grads["encoder.b"] = dpre.sum(axis=0)
    return OrderedDict((name, grads[name]) for name in params)


def _check_input(w: Waveform, cfg: TcnConfig) -> None:
    if w.sample_rate_hz != SAMPLE_RATE:
        raise ValueError(f"embedder expects {SAMPLE_RATE} Hz input, got {w.sample_rate_hz}")
    if len(w) < cfg.frame_hop_samples:
        raise ValueError(f"too short: {len(w)} samples < {cfg.frame_hop_samples}")


def forward(weights: ModelWeights, w: Waveform) -> np.ndarray:
    """Identity vectors for one 16 kHz waveform, shape ``(floor(N / 1024), 128)``."""
    cfg = weights.config
    _check_input(w, cfg)
    dtype = next(iter(weights.params.values())).dtype
    x = np.asarray(w.samples, dtype=dtype)[None, :]
    v, _ = forward_batch(weights.params, cfg, x)
    return v[0]


def mean_pool_embedding(seq: np.ndarray, normalize: bool = True) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise ValueError("mean_pool_embedding needs a nonempty (n, dim) sequence")
    p = seq.mean(axis=0)
    if normalize:
        p = p / max(float(np.linalg.norm(p)), np.finfo(np.float64).tiny)
    return p


def embed_snippet(weights: ModelWeights, w: Waveform) -> np.ndarray:
    """Pooled identity vector for one snippet (float64)."""
    seq = forward(weights, w).astype(np.float64)
    return mean_pool_embedding(seq, weights.config.l2_normalize_output)
