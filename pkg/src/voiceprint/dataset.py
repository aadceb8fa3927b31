"""Call manifests, cell counts and reproducible train/test partitions."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeding import rng_for

MANIFEST_COLUMNS = ("snippet_id", "individual_id", "call_type", "audio_path", "duration_s")

# Column order used by count-table printouts; unknown call types sort after these.
DEFAULT_CALL_TYPES = ("scream", "pant_hoot_intro", "pant_hoot_climax")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class CallRecord:
    snippet_id: str
    individual_id: str
    call_type: str
    audio_path: str
    duration_s: float

    def __post_init__(self):
        if not self.snippet_id:
            raise ManifestError("snippet_id must be nonempty")
        if not self.individual_id:
            raise ManifestError(f"{self.snippet_id}: individual_id must be nonempty")
        if not self.call_type:
            raise ManifestError(f"{self.snippet_id}: call_type must be nonempty")
        if not (self.duration_s > 0) or not math.isfinite(self.duration_s):
            raise ManifestError(f"{self.snippet_id}: duration_s must be positive, got {self.duration_s}")


@dataclass(frozen=True)
class Manifest:
    records: tuple[CallRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise ManifestError("empty manifest")
        seen = set()
        for r in self.records:
            if r.snippet_id in seen:
                raise ManifestError(f"duplicate snippet_id {r.snippet_id!r}")
            seen.add(r.snippet_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def individuals(self) -> list[str]:
        """Individual ids in order of first appearance."""
        return list(OrderedDict.fromkeys(r.individual_id for r in self.records))

    @property
    def call_types(self) -> list[str]:
        return _order_call_types(r.call_type for r in self.records)

    def subset(self, indices: Iterable[int]) -> "Manifest":
        return Manifest(tuple(self.records[i] for i in indices))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75
    seed: int = 0
    stratify_by_individual: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _order_call_types(types: Iterable[str]) -> list[str]:
    uniq = list(OrderedDict.fromkeys(types))
    known = [t for t in DEFAULT_CALL_TYPES if t in uniq]
    return known + [t for t in uniq if t not in DEFAULT_CALL_TYPES]


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError("empty manifest") from None
        if tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
            raise ManifestError(f"bad manifest header {header!r}; expected {','.join(MANIFEST_COLUMNS)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise ManifestError(f"line {lineno}: expected {len(MANIFEST_COLUMNS)} fields, got {len(row)}")
            try:
                duration = float(row[4])
            except ValueError:
                raise ManifestError(f"line {lineno}: duration_s is not a number: {row[4]!r}") from None
            records.append(CallRecord(row[0], row[1], row[2], row[3], duration))
    if not records:
        raise ManifestError("empty manifest")
    return Manifest(tuple(records))


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for r in manifest:
            w.writerow([r.snippet_id, r.individual_id, r.call_type, r.audio_path, repr(float(r.duration_s))])


def counts_by_cell(manifest: Manifest) -> dict[str, dict[str, int]]:
    """Nested ``{individual: {call_type: count}}`` covering every observed pair."""
    types = manifest.call_types
    table = {ind: {ct: 0 for ct in types} for ind in manifest.individuals}
    for r in manifest:
        table[r.individual_id][r.call_type] += 1
    return table


def format_counts(table: dict[str, dict[str, int]]) -> str:
    """Render a count table with row and column totals."""
    types = _order_call_types(ct for row in table.values() for ct in row)
    header = ["individual", *types, "all"]
    lines = [header]
    col_tot = [0] * len(types)
    for ind, row in table.items():
        vals = [row.get(ct, 0) for ct in types]
        col_tot = [a + b for a, b in zip(col_tot, vals)]
        lines.append([ind, *map(str, vals), str(sum(vals))])
    lines.append(["total", *map(str, col_tot), str(sum(col_tot))])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(line, widths)))
                     for line in lines)


def partition(manifest: Manifest, spec: SplitSpec) -> tuple[Manifest, Manifest]:
    train_idx, test_idx = partition_indices([r.individual_id for r in manifest], spec)
    return manifest.subset(train_idx), manifest.subset(test_idx)


def partition_indices(labels: Sequence, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Index form of :func:`partition`; both outputs are sorted ascending.

    Stratified splits take ``floor(fraction * n_class)`` from each class,
    otherwise ``floor(fraction * N)`` overall.
    """
    n = len(labels)
    rng = rng_for(spec.seed, "partition")
    if spec.stratify_by_individual:
        labels = np.asarray(labels)
        chosen = []
        for cls in sorted(set(labels.tolist()), key=str):
            members = np.flatnonzero(labels == cls)
            k = math.floor(spec.train_fraction * len(members))
            if k == 0:
                raise ValueError(f"stratified split impossible: class {cls!r} has {len(members)} record(s)")
            chosen.append(rng.permutation(members)[:k])
        train = np.sort(np.concatenate(chosen))
    else:
        k = math.floor(spec.train_fraction * n)
        if k == 0:
            raise ValueError("train split would be empty")
        train = np.sort(rng.permutation(n)[:k])
    mask = np.ones(n, dtype=bool)
    mask[train] = False
    return train, np.flatnonzero(mask)
