"""Serialization of experiment results: raw-score CSV, JSON reports, confusion CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .experiments import CallTypeConfusion, ComparisonPoint

RAW_COLUMNS = ("replicate", "classifier", "feature_space", "n_train", "C", "metric", "value")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_raw_scores(rows, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def write_confusion_csv(matrices: list[CallTypeConfusion], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["individual", "call_type", "predicted", "count", "proportion"])
        for m in matrices:
            props = m.proportions
            for i, ct in enumerate(m.call_types):
                for j, pred in enumerate(m.predicted):
                    w.writerow([m.individual, ct, pred, int(m.counts[i, j]), repr(float(props[i, j]))])


def write_points_csv(points: list[ComparisonPoint], path: str | Path) -> None:
    cols = ("feature_space", "n_train", "fraction", "mean_accuracy", "ci95_low", "ci95_high", "n_replicates",
            "n_failed")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for p in points:
            w.writerow([_cell(getattr(p, c)) for c in cols])


def format_summary_table(summaries: dict) -> str:
    """Plain-text summary table: metrics as rows, classifiers as columns."""
    names = list(summaries)
    lines = ["metric".ljust(12) + "".join(n.rjust(18) for n in names)]
    for metric in ("f1_weighted", "accuracy"):
        cells = []
        for n in names:
            s = summaries[n][metric]
            cells.append(f"{s.mean:.3f} +/- {s.sem:.3f}".rjust(18))
        lines.append(metric.ljust(12) + "".join(cells))
    return "\n".join(lines)
