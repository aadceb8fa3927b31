"""Source-filter synthetic call corpus.

Each snippet is a pulse train at a contoured fundamental, shaped by three
resonant formant filters and mixed with filtered noise.  Identity lives in the
individual's base F0, formant frequencies and jitter; call type fixes the F0
contour, duration range, noise mix and element count.  With ``null_identity``
the identity cues are redrawn for every (individual, call type) cell, so no
voice print survives across call types.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal

from .audio import Waveform, write_wav
from .dataset import CallRecord, Manifest, write_manifest
from .seeding import rng_for

TABLE1_INDIVIDUALS = ("Squibs", "Nambi", "Zed")
TABLE1_CALL_TYPES = ("scream", "pant_hoot_intro", "pant_hoot_climax")
TABLE1_COUNTS = ((30, 29, 13), (30, 20, 17), (33, 12, 11))

FORMANT_BANDWIDTHS_HZ = (90.0, 130.0, 180.0)

# Prior ranges identity profiles are drawn from.
F0_RANGE_HZ = (180.0, 650.0)
FORMANT_RANGES_HZ = ((450.0, 1300.0), (1400.0, 2800.0), (2900.0, 4800.0))
JITTER_RANGE = (0.005, 0.03)


@dataclass(frozen=True)
class IdentityProfile:
    name: str
    base_f0_hz: float
    formants_hz: tuple[float, float, float]
    jitter: float


@dataclass(frozen=True)
class CallTypeProfile:
    name: str
    contour: str  # flat | rising | peaked
    f0_scale: float
    duration_range_s: tuple[float, float]
    noise_mix: float
    n_elements: int


DEFAULT_CALL_TYPE_PROFILES = (
    CallTypeProfile("scream", "flat", 1.6, (0.7, 1.2), 0.35, 1),
    CallTypeProfile("pant_hoot_intro", "rising", 0.8, (0.6, 1.0), 0.10, 4),
    CallTypeProfile("pant_hoot_climax", "peaked", 1.3, (0.6, 1.1), 0.20, 2),
)


@dataclass(frozen=True)
class SynthSpec:
    identities: tuple[IdentityProfile, ...]
    call_types: tuple[CallTypeProfile, ...]
    snippets_per_cell: tuple[tuple[int, ...], ...]
    sample_rate_hz: int = 44100
    null_identity: bool = False
    # per-snippet relative scatter of F0 and formants around the individual's profile
    cue_scatter: float = 0.08

    def __post_init__(self):
        if len(self.snippets_per_cell) != len(self.identities):
            raise ValueError("snippets_per_cell needs one row per individual")
        for row in self.snippets_per_cell:
            if len(row) != len(self.call_types):
                raise ValueError("snippets_per_cell needs one column per call type")
            if any(c < 0 for c in row):
                raise ValueError("snippets_per_cell entries must be >= 0")
        nyq = self.sample_rate_hz / 2
        for ident in self.identities:
            if max(ident.formants_hz) >= nyq:
                raise ValueError(f"{ident.name}: formants must lie below Nyquist {nyq}")

    @property
    def n_individuals(self) -> int:
        return len(self.identities)


@dataclass
class SynthResult:
    manifest: Manifest
    params: list[dict] = field(default_factory=list)


def draw_identity(name: str, rng: np.random.Generator) -> IdentityProfile:
    """One identity drawn independently from the prior."""
    u = rng.uniform(size=5)
    return _identity_from_unit(name, u)


def _identity_from_unit(name: str, u) -> IdentityProfile:
    lo, hi = np.log(F0_RANGE_HZ)
    f0 = float(np.exp(lo + u[0] * (hi - lo)))
    formants = tuple(float(a + x * (b - a)) for (a, b), x in zip(FORMANT_RANGES_HZ, u[1:4]))
    return IdentityProfile(name, f0, formants, float(JITTER_RANGE[0] + u[4] * (JITTER_RANGE[1] - JITTER_RANGE[0])))


def random_identities(names: Sequence[str], seed: int) -> tuple[IdentityProfile, ...]:
    """Latin-hypercube draw: each cue's range is cut into ``len(names)`` strata
    and every individual lands in a different stratum of every cue."""
    n = len(names)
    rng = rng_for(seed, "synth/identity")
    strata = np.stack([rng.permutation(n) for _ in range(5)], axis=1)
    u = (strata + rng.uniform(size=(n, 5))) / n
    return tuple(_identity_from_unit(name, row) for name, row in zip(names, u))


def table1_spec(seed: int, null_identity: bool = False, sample_rate_hz: int = 44100,
                cue_scatter: float = 0.08) -> SynthSpec:
    """Three individuals by three call types with the reference cell counts (195 snippets)."""
    return SynthSpec(
        identities=random_identities(TABLE1_INDIVIDUALS, seed),
        call_types=DEFAULT_CALL_TYPE_PROFILES,
        snippets_per_cell=TABLE1_COUNTS,
        sample_rate_hz=sample_rate_hz,
        null_identity=null_identity,
        cue_scatter=cue_scatter,
    )


def uniform_spec(n_individuals: int, per_cell: int, seed: int, prefix: str = "spk",
                 sample_rate_hz: int = 44100, cue_scatter: float = 0.08) -> SynthSpec:
    names = [f"{prefix}{i:02d}" for i in range(n_individuals)]
    k = len(DEFAULT_CALL_TYPE_PROFILES)
    return SynthSpec(
        identities=random_identities(names, seed),
        call_types=DEFAULT_CALL_TYPE_PROFILES,
        snippets_per_cell=tuple((per_cell,) * k for _ in names),
        sample_rate_hz=sample_rate_hz,
        cue_scatter=cue_scatter,
    )


def _contour(kind: str, t: np.ndarray) -> np.ndarray:
    """Relative F0 over normalized element time ``t`` in [0, 1]."""
    if kind == "flat":
        return np.ones_like(t)
    if kind == "rising":
        return 0.85 + 0.3 * t
    if kind == "peaked":
        return 0.8 + 0.4 * np.sin(np.pi * t)
    raise ValueError(f"unknown contour {kind!r}")


def _resonator(x: np.ndarray, freq: float, bw: float, rate: int) -> np.ndarray:
    r = np.exp(-np.pi * bw / rate)
    theta = 2 * np.pi * freq / rate
    a = [1.0, -2 * r * np.cos(theta), r * r]
    gain = 1 - r  # rough peak normalization
    return signal.lfilter([gain], a, x)


def render_snippet(identity: IdentityProfile, call: CallTypeProfile, rate: int,
                   rng: np.random.Generator, cue_scatter: float = 0.0) -> tuple[np.ndarray, dict]:
    f0_base = identity.base_f0_hz * float(np.exp(cue_scatter * rng.standard_normal()))
    formants = [min(f * float(np.exp(cue_scatter * rng.standard_normal())), 0.45 * rate)
                for f in identity.formants_hz]
    duration = float(rng.uniform(*call.duration_range_s))
    n = int(round(duration * rate))
    src = np.zeros(n)
    bounds = np.linspace(0, n, call.n_elements + 1).astype(int)
    for a, b in zip(bounds[:-1], bounds[1:]):
        # short gap between elements
        gap = int(0.15 * (b - a)) if call.n_elements > 1 else 0
        m = b - a - gap
        t = np.linspace(0.0, 1.0, m)
        walk = np.cumsum(rng.standard_normal(m)) / np.sqrt(m)
        f0 = f0_base * call.f0_scale * _contour(call.contour, t) * (1 + identity.jitter * walk)
        phase = np.cumsum(f0) / rate
        saw = 2.0 * (phase - np.floor(phase)) - 1.0
        env = np.sin(np.pi * t) ** 0.5
        voiced = saw * env
        noise = rng.standard_normal(m) * env * 0.5
        src[a:a + m] = (1 - call.noise_mix) * voiced + call.noise_mix * noise
    out = np.zeros(n)
    for f, bw in zip(formants, FORMANT_BANDWIDTHS_HZ):
        out += _resonator(src, f, bw, rate)
    out += 0.002 * rng.standard_normal(n)
    out *= 0.9 / max(np.abs(out).max(), 1e-12)
    params = {"base_f0_hz": identity.base_f0_hz, "formants_hz": list(identity.formants_hz),
              "jitter": identity.jitter, "call_type": call.name, "duration_s": n / rate,
              "realized_f0_hz": f0_base, "realized_formants_hz": formants}
    return out, params


def synthesize_corpus(spec: SynthSpec, seed: int, out_dir: str | Path) -> SynthResult:
    """Render every requested snippet to ``out_dir/audio`` and write ``manifest.csv``.

    Returns the manifest plus per-snippet generation parameters (also written
    to ``synth_meta.json``).
    """
    if sum(sum(row) for row in spec.snippets_per_cell) == 0:
        raise ValueError("empty corpus")
    out_dir = Path(out_dir)
    try:
        (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot write to {out_dir}: {exc}") from exc

    records, params = [], []
    idx = 0
    for i, ident in enumerate(spec.identities):
        for j, call in enumerate(spec.call_types):
            cell_ident = ident
            if spec.null_identity:
                cell_ident = draw_identity(ident.name, rng_for(seed, f"synth/null/{ident.name}/{call.name}"))
            for k in range(spec.snippets_per_cell[i][j]):
                sid = f"{ident.name}_{call.name}_{k:03d}"
                samples, p = render_snippet(cell_ident, call, spec.sample_rate_hz,
                                              rng_for(seed, f"synth/{idx}"), spec.cue_scatter)
                rel = f"audio/{sid}.wav"
                write_wav(out_dir / rel, Waveform(samples.astype(np.float32), spec.sample_rate_hz))
                records.append(CallRecord(sid, ident.name, call.name, rel, p["duration_s"]))
                params.append({"snippet_id": sid, "individual_id": ident.name, **p})
                idx += 1
    manifest = Manifest(tuple(records))
    write_manifest(manifest, out_dir / "manifest.csv")
    meta = {"seed": int(seed), "null_identity": spec.null_identity,
            "sample_rate_hz": spec.sample_rate_hz,
            "identities": [asdict(x) for x in spec.identities],
            "call_types": [asdict(c) for c in spec.call_types],
            "snippets": params}
    (out_dir / "synth_meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return SynthResult(manifest, params)
