"""Command-line entry point: ``voiceprint <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .audio import read_wav, resample
from .config import ConfigError, RunConfig, load_config
from .dataset import counts_by_cell, format_counts, load_manifest
from .embedder import init_weights, load_weights, save_weights, train
from .embedder.tcn import SAMPLE_RATE
from .eval import classifier_comparison, confusion_by_calltype, feature_space_comparison
from .eval.report import (format_summary_table, write_confusion_csv, write_json, write_points_csv,
                          write_raw_scores)
from .eval.svg import comparison_chart, confusion_tables
from .features import audio_path, extract, read_features, write_features
from .seeding import derive_seed
from .synth import synthesize_corpus, table1_spec, uniform_spec

log = logging.getLogger("voiceprint")


def _config(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    return cfg.with_overrides(seed=getattr(args, "seed", None), jobs=getattr(args, "jobs", None))


def cmd_synth(args) -> int:
    cfg = _config(args)
    seed = cfg.require_seed()
    s = cfg.synth
    if args.preset:
        s = replace(s, preset=args.preset)
    if args.null_identity:
        s = replace(s, null_identity=True)
    if s.preset == "table1":
        spec = table1_spec(seed, s.null_identity, s.sample_rate_hz, s.cue_scatter)
    else:
        spec = uniform_spec(s.n_individuals, s.per_cell, seed, s.name_prefix, s.sample_rate_hz, s.cue_scatter)
        spec = replace(spec, null_identity=s.null_identity)
    res = synthesize_corpus(spec, seed, args.out)
    print(format_counts(counts_by_cell(res.manifest)))
    return 0


def cmd_extract(args) -> int:
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    weights = None
    if args.frontend == "learnt":
        if not args.weights:
            raise ConfigError("--weights is required for the learnt frontend")
        weights = load_weights(args.weights)
    table = extract(manifest, args.manifest, args.frontend, weights, cfg.mfcc)
    write_features(table, args.out)
    print(f"wrote {len(table)} rows x {table.X.shape[1]} features to {args.out}")
    return 0


def cmd_train_embedder(args) -> int:
    cfg = _config(args)
    seed = cfg.require_seed()
    manifest = load_manifest(args.corpus)
    clips: dict[str, list[np.ndarray]] = {}
    for r in manifest:
        w = resample(read_wav(audio_path(args.corpus, r.audio_path)), SAMPLE_RATE)
        clips.setdefault(r.individual_id, []).append(np.asarray(w.samples))
    tc = replace(cfg.train, seed=derive_seed(seed, "embedder/train"))
    weights, trace = train(init_weights(cfg.tcn, derive_seed(seed, "embedder/init")), tc, clips)
    out = Path(args.out)
    save_weights(weights, out)
    trace_path = out.with_name(out.stem + "_loss.csv")
    with trace_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "loss"])
        for i, v in enumerate(trace):
            w.writerow([i, repr(float(v))])
    k = min(20, len(trace))
    if k:
        print(f"loss: first {k} steps {trace[:k].mean():.4f}, last {k} steps {trace[-k:].mean():.4f}")
    print(f"wrote {out} and {trace_path}")
    return 0


def _report_failures(kind: str, failures: list) -> None:
    if failures:
        print(f"{kind}: {len(failures)} replicate fit(s) failed and were excluded (see JSON)", file=sys.stderr)


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    seed = cfg.require_seed()
    manifest = load_manifest(args.manifest)
    table = read_features(args.features).aligned_to(manifest)
    ev = cfg.evaluate
    result = classifier_comparison(table.X, table.individuals, cfg.classifiers, ev.n_reps, ev.split, seed,
                                   ev.stratified, cfg.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_raw_scores(result.raw_rows(args.feature_space), out / "raw_scores.csv")
    doc = result.to_dict()
    if ev.confusion_classifier in result.classifiers:
        mats, omitted = confusion_by_calltype(result.predictions(ev.confusion_classifier), table.individuals,
                                              table.call_types, manifest.individuals, manifest.call_types)
        doc["confusion"] = {"classifier": ev.confusion_classifier, "matrices": [m.to_dict() for m in mats],
                            "omitted_rows": [list(o) for o in omitted]}
        write_confusion_csv(mats, out / "confusion.csv")
        (out / "confusion.svg").write_text(confusion_tables(mats), encoding="utf-8")
    write_json(doc, out / "report.json")
    print(format_summary_table(result.summaries))
    for name, ms in result.summaries.items():
        if ms["accuracy"].degenerate:
            print(f"{name}: single replicate, sem reported as 0 (degenerate)", file=sys.stderr)
    _report_failures("evaluate", result.failures)
    return 0


def cmd_compare(args) -> int:
    cfg = _config(args)
    seed = cfg.require_seed()
    manifest = load_manifest(args.manifest)
    mf = read_features(args.mfcc).aligned_to(manifest)
    lf = read_features(args.learnt).aligned_to(manifest)
    cmp = cfg.compare
    res = feature_space_comparison({"mfcc": mf.X, "learnt": lf.X}, mf.individuals, cmp.train_grid, cmp.c_bins,
                                   cmp.per_bin, seed, jobs=cfg.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_points_csv(res.points, out / "points.csv")
    write_raw_scores(res.raw, out / "raw_scores.csv")
    doc = res.to_dict()
    doc.update({"master_seed": seed, "c_bins": [list(b) for b in cmp.c_bins], "per_bin": cmp.per_bin,
                "train_grid": list(cmp.train_grid), "n_records": len(manifest)})
    write_json(doc, out / "compare.json")
    (out / "compare.svg").write_text(comparison_chart(res.points), encoding="utf-8")
    for p in res.points:
        print(f"{p.feature_space:>7} n={p.n_train:<4d} acc={p.mean_accuracy:.3f} "
              f"[{p.ci95_low:.3f}, {p.ci95_high:.3f}] reps={p.n_replicates}")
    _report_failures("compare", res.failures)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="voiceprint", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, jobs=False):
        sp.add_argument("--config", help="YAML run configuration")
        if seed:
            sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        if jobs:
            sp.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")

    sp = sub.add_parser("synth", help="render a synthetic call corpus")
    common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--preset", choices=("table1", "uniform"))
    sp.add_argument("--null-identity", action="store_true", help="redraw identity cues per call type")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("extract", help="one pooled feature vector per snippet")
    common(sp, seed=False)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--frontend", choices=("mfcc", "learnt"), required=True)
    sp.add_argument("--weights")
    sp.add_argument("--out", required=True, help="feature CSV")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("train-embedder", help="train the identity embedder with triplet loss")
    common(sp)
    sp.add_argument("--corpus", required=True, help="manifest of the training corpus")
    sp.add_argument("--out", required=True, help="weights file")
    sp.set_defaults(func=cmd_train_embedder)

    sp = sub.add_parser("evaluate", help="repeated-partition classifier comparison and confusion tables")
    common(sp, jobs=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--feature-space", default="", help="label written into raw_scores.csv")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="MFCC vs learnt accuracy across training-set sizes")
    common(sp, jobs=True)
    sp.add_argument("--mfcc", required=True, help="MFCC feature CSV")
    sp.add_argument("--learnt", required=True, help="learnt feature CSV")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_compare)
    return p


# arguments naming files that must exist before any work starts
INPUT_ARGS = ("config", "manifest", "features", "mfcc", "learnt", "corpus", "weights")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in INPUT_ARGS:
        value = getattr(args, name, None)
        if value is not None and not Path(value).is_file():
            parser.error(f"--{name}: file not found: {value}")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
