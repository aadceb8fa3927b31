"""Per-snippet feature extraction for both frontends, and the shared feature CSV."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import read_wav, resample
from .dataset import Manifest
from .embedder import ModelWeights, embed_snippet
from .embedder.tcn import SAMPLE_RATE
from .mfcc import FEATURE_DIM, MfccConfig, mfcc_features

FEATURE_COLUMNS = tuple(f"f{i:03d}" for i in range(FEATURE_DIM))
META_COLUMNS = ("snippet_id", "individual_id", "call_type")


@dataclass(frozen=True)
class FeatureTable:
    snippet_ids: tuple[str, ...]
    individuals: np.ndarray
    call_types: np.ndarray
    X: np.ndarray

    def __len__(self) -> int:
        return len(self.snippet_ids)

    def aligned_to(self, manifest: Manifest) -> "FeatureTable":
        """Rows reordered to follow the manifest; every snippet must be present."""
        pos = {s: i for i, s in enumerate(self.snippet_ids)}
        missing = [r.snippet_id for r in manifest if r.snippet_id not in pos]
        if missing:
            raise ValueError(f"{len(missing)} manifest snippets have no features, e.g. {missing[0]!r}")
        order = np.array([pos[r.snippet_id] for r in manifest])
        return FeatureTable(tuple(self.snippet_ids[i] for i in order), self.individuals[order],
                            self.call_types[order], self.X[order])


def audio_path(manifest_path: str | Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else Path(manifest_path).parent / p


def extract(manifest: Manifest, manifest_path: str | Path, frontend: str,
            weights: ModelWeights | None = None, mfcc_config: MfccConfig = MfccConfig()) -> FeatureTable:
    """One pooled 128-dim vector per snippet.

    ``mfcc`` reads audio at its native rate; ``learnt`` resamples to 16 kHz
    and needs ``weights``.
    """
    if frontend not in ("mfcc", "learnt"):
        raise ValueError(f"unknown frontend {frontend!r}")
    if frontend == "learnt" and weights is None:
        raise ValueError("the learnt frontend needs a weights file")
    rows = []
    for r in manifest:
        w = read_wav(audio_path(manifest_path, r.audio_path))
        if frontend == "mfcc":
            rows.append(mfcc_features(w, mfcc_config))
        else:
            rows.append(embed_snippet(weights, resample(w, SAMPLE_RATE)))
    return FeatureTable(tuple(r.snippet_id for r in manifest),
                        np.array([r.individual_id for r in manifest]),
                        np.array([r.call_type for r in manifest]),
                        np.asarray(rows, dtype=np.float64))


def write_features(table: FeatureTable, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(META_COLUMNS + FEATURE_COLUMNS[:table.X.shape[1]])
        for sid, ind, ct, row in zip(table.snippet_ids, table.individuals, table.call_types, table.X):
            w.writerow([sid, ind, ct, *(repr(float(v)) for v in row)])


def read_features(path: str | Path) -> FeatureTable:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"feature file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:3]) != META_COLUMNS:
            raise ValueError(f"{path}: not a feature CSV (header {header!r})")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    width = len(header) - 3
    for i, row in enumerate(rows):
        if len(row) != width + 3:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, expected {width + 3}")
    X = np.array([[float(v) for v in row[3:]] for row in rows])
    return FeatureTable(tuple(r[0] for r in rows), np.array([r[1] for r in rows]),
                        np.array([r[2] for r in rows]), X)
