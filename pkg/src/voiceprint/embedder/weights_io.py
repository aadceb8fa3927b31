"""Versioned binary weights container.

Layout (little-endian)::

    magic      8 bytes  b"VPTCNW\\x00\\x00"
    version    uint32
    cfg_len    uint32, then cfg_len bytes of UTF-8 JSON (TcnConfig)
    n_tensors  uint32
    per tensor: uint16 name_len, name, uint8 ndim, ndim x uint32 dims,
                float32 data in C order

Tensors appear in ``TcnConfig.param_shapes()`` order.
"""

from __future__ import annotations

import json
import struct
from collections import OrderedDict
from pathlib import Path

import numpy as np

from .tcn import ModelWeights, TcnConfig

MAGIC = b"VPTCNW\x00\x00"
VERSION = 1


class WeightsFormatError(ValueError):
    pass


def save_weights(weights: ModelWeights, path: str | Path) -> None:
    cfg = json.dumps(weights.config.to_dict(), sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(cfg)), cfg, struct.pack("<I", len(weights.params))]
    for name, arr in weights.params.items():
        a = np.ascontiguousarray(arr, dtype="<f4")
        bname = name.encode("utf-8")
        parts.append(struct.pack("<H", len(bname)) + bname)
        parts.append(struct.pack("<B", a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape))
        parts.append(a.tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.pos = buf, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise WeightsFormatError("truncated weights file")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_weights(path: str | Path, expected: TcnConfig | None = None) -> ModelWeights:
    """Read a weights file; raise if it is malformed or disagrees with ``expected``."""
    r = _Reader(Path(path).read_bytes())
    if r.buf[:len(MAGIC)] != MAGIC:
        raise WeightsFormatError("not a weights file")
    r.take(len(MAGIC))
    version, cfg_len = r.unpack("<II")
    if version != VERSION:
        raise WeightsFormatError(f"unsupported weights version {version}")
    try:
        cfg = TcnConfig(**json.loads(r.take(cfg_len).decode("utf-8")))
    except (TypeError, ValueError) as exc:
        raise WeightsFormatError(f"bad config block: {exc}") from exc
    if expected is not None and cfg != expected:
        raise WeightsFormatError(f"weights config {cfg} does not match expected {expected}")
    shapes = cfg.param_shapes()
    (n,) = r.unpack("<I")
    if n != len(shapes):
        raise WeightsFormatError(f"expected {len(shapes)} tensors, found {n}")
    params = OrderedDict()
    for want_name, want_shape in shapes.items():
        (nlen,) = r.unpack("<H")
        name = r.take(nlen).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        if name != want_name or tuple(shape) != tuple(want_shape):
            raise WeightsFormatError(f"tensor {name}{shape} does not match {want_name}{want_shape}")
        count = int(np.prod(shape))
        params[name] = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape).astype(np.float32)
    if r.pos != len(r.buf):
        raise WeightsFormatError("trailing bytes after last tensor")
    return ModelWeights(cfg, params)
