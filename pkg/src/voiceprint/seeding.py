"""Named seed derivation.

Every random stream in the pipeline is keyed by ``(master_seed, path)`` where
``path`` is a slash-separated name such as ``"synth/3"`` or ``"eval/rep/417"``.
Streams are independent of execution order, so serial and parallel runs agree.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, path: str) -> int:
    """Return a 64-bit seed for the named stream."""
    digest = hashlib.sha256(f"{int(master_seed)}:{path}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(master_seed: int, path: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, path)))
