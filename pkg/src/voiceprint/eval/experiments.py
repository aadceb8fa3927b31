"""Repeated-partition classifier comparison, per-call-type confusion and the
feature-space learning-curve sweep.

Every replicate draws its randomness from ``derive_seed(master_seed, path)``
with the path recorded alongside the result:

* ``eval/rep/<r>``                 partition of replicate ``r``
* ``eval/rep/<r>/<classifier>``    classifier-internal randomness (forests)
* ``compare/<n_train>/<bin>/<r>``  subset and C draw of one sweep replicate
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..classifiers import ClassifierSpec, FitError, Standardized, SvmClassifier
from ..dataset import SplitSpec, partition_indices
from ..seeding import derive_seed, rng_for
from .metrics import MetricSummary, accuracy, ci95, f1_weighted
from .parallel import parallel_map

log = logging.getLogger(__name__)

METRICS = ("accuracy", "f1_weighted")
DEFAULT_C_BINS = ((0.1, 1.0), (1.0, 10.0), (10.0, 100.0), (100.0, 1000.0))
DEFAULT_TRAIN_GRID = (5, 10, 20, 40, 60, 80, 100, 120, 140, 160, 175)


@dataclass
class ReplicateOutcome:
    replicate: int
    classifier: str
    n_train: int = 0
    test_index: np.ndarray | None = None
    predicted: np.ndarray | None = None
    scores: dict[str, float] = field(default_factory=dict)
    kkt_gap: float | None = None
    error: str | None = None


@dataclass
class ComparisonResult:
    master_seed: int
    n_replicates: int
    train_fraction: float
    stratified: bool
    classifiers: list[str]
    summaries: dict[str, dict[str, MetricSummary]]
    outcomes: list[ReplicateOutcome]

    @property
    def failures(self) -> list[ReplicateOutcome]:
        return [o for o in self.outcomes if o.error is not None]

    def raw_rows(self, feature_space: str = "") -> list[tuple]:
        """(replicate, classifier, feature_space, n_train, C, metric, value) rows."""
        rows = []
        for o in self.outcomes:
            if o.error is not None:
                continue
            for metric in METRICS:
                rows.append((o.replicate, o.classifier, feature_space, o.n_train, None, metric, o.scores[metric]))
        return rows

    def predictions(self, classifier: str) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(o.test_index, o.predicted) for o in self.outcomes
                if o.classifier == classifier and o.error is None]

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "n_replicates_requested": self.n_replicates,
            "train_fraction": self.train_fraction,
            "stratified": self.stratified,
            "seed_paths": {"partition": "eval/rep/<r>", "classifier": "eval/rep/<r>/<classifier>"},
            "summaries": {c: {m: s.to_dict() for m, s in ms.items()} for c, ms in self.summaries.items()},
            "max_svm_kkt_gap": max((o.kkt_gap for o in self.outcomes if o.kkt_gap is not None), default=None),
            "failures": [{"replicate": o.replicate, "classifier": o.classifier, "error": o.error}
                         for o in self.failures],
        }


def _comparison_replicate(ctx, r):
    X, y, specs, master_seed, split_fraction, stratified = ctx
    split = SplitSpec(split_fraction, derive_seed(master_seed, f"eval/rep/{r}"), stratified)
    tr, te = partition_indices(y, split)
    out = []
    for spec in specs:
        o = ReplicateOutcome(r, spec.label, int(tr.size))
        try:
            model = spec.fit(X[tr], y[tr], seed=derive_seed(master_seed, f"eval/rep/{r}/{spec.label}"))
            pred = model.predict(X[te])
        except (FitError, ValueError, np.linalg.LinAlgError) as exc:
            o.error = f"{type(exc).__name__}: {exc}"
            out.append(o)
            continue
        o.test_index, o.predicted = te, pred
        o.scores = {"accuracy": accuracy(y[te], pred), "f1_weighted": f1_weighted(y[te], pred)}
        inner = model.inner if isinstance(model, Standardized) else model
        if isinstance(inner, SvmClassifier):
            o.kkt_gap = inner.max_kkt_gap
        out.append(o)
    return out


def classifier_comparison(features, labels, specs: Sequence[ClassifierSpec], n_reps: int = 500,
                          split: float = 0.75, master_seed: int = 0, stratified: bool = True,
                          jobs: int | None = 1) -> ComparisonResult:
    """Fit and score every classifier on ``n_reps`` random train/test partitions."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if np.unique(y).size < 2:
        raise ValueError("need at least two classes")
    names = [s.label for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("classifier labels must be unique")
    ctx = (X, y, tuple(specs), int(master_seed), float(split), bool(stratified))
    per_rep = parallel_map(_comparison_replicate, list(range(n_reps)), ctx, jobs)
    outcomes = [o for rep in per_rep for o in rep]
    summaries = {}
    for name in names:
        ok = [o for o in outcomes if o.classifier == name and o.error is None]
        if len(ok) < n_reps:
            log.warning("%s: %d of %d replicates failed and were excluded", name, n_reps - len(ok), n_reps)
        if ok:
            summaries[name] = {m: MetricSummary.of(m, [o.scores[m] for o in ok]) for m in METRICS}
    return ComparisonResult(int(master_seed), n_reps, float(split), bool(stratified), names, summaries, outcomes)


@dataclass(frozen=True)
class CallTypeConfusion:
    individual: str
    call_types: tuple[str, ...]
    predicted: tuple[str, ...]
    counts: np.ndarray  # rows call types, columns predicted individuals

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.counts.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {"individual": self.individual, "call_types": list(self.call_types),
                "predicted": list(self.predicted), "counts": self.counts.astype(int).tolist(),
                "proportions": self.proportions.tolist()}


def confusion_by_calltype(predictions, individuals: Sequence[str], call_types: Sequence[str],
                          individual_order: Sequence[str] | None = None,
                          call_type_order: Sequence[str] | None = None) -> tuple[list[CallTypeConfusion], list]:
    """Pool test predictions over replicates into one matrix per true individual.

    ``predictions`` is an iterable of ``(record_indices, predicted_labels)``;
    ``individuals`` and ``call_types`` give the true labels of every record.
    Returns the matrices and the list of omitted (individual, call type) rows,
    i.e. cells never seen in any test set.
    """
    inds = np.asarray(individuals)
    cts = np.asarray(call_types)
    ind_order = list(individual_order or dict.fromkeys(inds.tolist()))
    ct_order = list(call_type_order or dict.fromkeys(cts.tolist()))
    ipos = {v: i for i, v in enumerate(ind_order)}
    cpos = {v: i for i, v in enumerate(ct_order)}
    counts = np.zeros((len(ind_order), len(ct_order), len(ind_order)), dtype=np.int64)
    for idx, pred in predictions:
        idx = np.asarray(idx)
        for rec, p in zip(idx.tolist(), np.asarray(pred).tolist()):
            counts[ipos[inds[rec]], cpos[cts[rec]], ipos[p]] += 1
    out, omitted = [], []
    for i, ind in enumerate(ind_order):
        keep = [c for c in range(len(ct_order)) if counts[i, c].sum() > 0]
        for c in range(len(ct_order)):
            if c not in keep:
                omitted.append((ind, ct_order[c]))
                log.warning("no test occurrences for %s / %s; row omitted", ind, ct_order[c])
        if keep:
            out.append(CallTypeConfusion(ind, tuple(ct_order[c] for c in keep), tuple(ind_order),
                                         counts[i, keep].astype(np.float64)))
    return out, omitted


def stratified_subset(labels: np.ndarray, n_train: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly ``n_train`` indices, allocated to classes in proportion to their size
    (largest remainder, at least one per class, at most size - 1)."""
    classes, inv, sizes = np.unique(labels, return_inverse=True, return_counts=True)
    k = classes.size
    if n_train < k:
        raise ValueError(f"n_train={n_train} is smaller than the number of classes ({k})")
    if n_train > labels.size - k:
        raise ValueError(f"n_train={n_train} leaves no test point for some class")
    quota = n_train * sizes / sizes.sum()
    alloc = np.clip(np.floor(quota).astype(int), 1, sizes - 1)
    while alloc.sum() != n_train:
        rem = quota - alloc
        if alloc.sum() < n_train:
            rem = np.where(alloc < sizes - 1, rem, -np.inf)
            alloc[int(np.argmax(rem))] += 1
        else:
            rem = np.where(alloc > 1, rem, np.inf)
            alloc[int(np.argmin(rem))] -= 1
    chosen = [rng.permutation(np.flatnonzero(inv == c))[:alloc[c]] for c in range(k)]
    return np.sort(np.concatenate(chosen))


@dataclass(frozen=True)
class ComparisonPoint:
    feature_space: str
    n_train: int
    fraction: float
    mean_accuracy: float
    ci95_low: float
    ci95_high: float
    n_replicates: int
    n_failed: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SweepResult:
    points: list[ComparisonPoint]
    raw: list[tuple]  # (replicate, classifier, feature_space, n_train, C, metric, value)
    failures: list[dict]
    max_kkt_gap: float

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points], "failures": self.failures,
                "max_svm_kkt_gap": self.max_kkt_gap,
                "seed_paths": {"replicate": "compare/<n_train>/<bin>/<r>"}}


def sweep_draw(labels, n_train: int, c_bin: tuple[float, float], master_seed: int, bin_index: int, r: int):
    """Training indices and C for one sweep replicate (shared by all feature spaces)."""
    rng = rng_for(master_seed, f"compare/{n_train}/{bin_index}/{r}")
    lo, hi = c_bin
    C = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return stratified_subset(labels, n_train, rng), C


def _sweep_job(ctx, job):
    spaces, y, master_seed, c_bins, svm_params = ctx
    n_train, b, r = job
    tr, C = sweep_draw(y, n_train, c_bins[b], master_seed, b, r)
    mask = np.ones(y.size, dtype=bool)
    mask[tr] = False
    results = []
    for name, X in spaces:
        try:
            model = ClassifierSpec("svm", {**svm_params, "C": C}).fit(X[tr], y[tr])
            results.append((accuracy(y[mask], model.predict(X[mask])), C, model.max_kkt_gap, None))
        except (FitError, ValueError) as exc:
            results.append((None, C, None, f"{type(exc).__name__}: {exc}"))
    return results


def feature_space_comparison(spaces: dict[str, np.ndarray], labels, train_grid: Sequence[int] = DEFAULT_TRAIN_GRID,
                             c_bins: Sequence[tuple[float, float]] = DEFAULT_C_BINS, per_bin: int = 500,
                             master_seed: int = 0, svm_params: dict | None = None,
                             jobs: int | None = 1) -> SweepResult:
    """SVM accuracy vs training-set size for each feature space.

    Each point pools ``len(c_bins) * per_bin`` replicates; within a bin C is
    drawn log-uniformly.  All feature spaces see the same subsets and C values.
    """
    y = np.asarray(labels)
    names = list(spaces)
    mats = tuple((n, np.asarray(spaces[n], dtype=np.float64)) for n in names)
    for n, X in mats:
        if X.shape[0] != y.size:
            raise ValueError(f"feature space {n!r} has {X.shape[0]} rows for {y.size} labels")
    k = np.unique(y).size
    for n_train in train_grid:
        if n_train >= y.size:
            raise ValueError(f"grid value {n_train} must be smaller than the dataset ({y.size})")
        if n_train < k:
            raise ValueError(f"n_train={n_train} is smaller than the number of classes ({k})")
    jobs_list = [(n, b, r) for n in train_grid for b in range(len(c_bins)) for r in range(per_bin)]
    ctx = (mats, y, int(master_seed), tuple(tuple(b) for b in c_bins), dict(svm_params or {}))
    results = parallel_map(_sweep_job, jobs_list, ctx, jobs)

    raw, failures, points = [], [], []
    max_gap = 0.0
    for si, (name, _) in enumerate(mats):
        by_n: dict[int, list[float]] = {n: [] for n in train_grid}
        failed = {n: 0 for n in train_grid}
        for (n_train, b, r), res in zip(jobs_list, results):
            acc, C, gap, err = res[si]
            rep = b * per_bin + r
            if err is not None:
                failed[n_train] += 1
                failures.append({"feature_space": name, "n_train": n_train, "replicate": rep, "error": err})
                continue
            max_gap = max(max_gap, gap)
            by_n[n_train].append(acc)
            raw.append((rep, "svm", name, n_train, C, "accuracy", acc))
        for n_train in train_grid:
            scores = np.array(by_n[n_train])
            if scores.size == 0:
                continue
            lo, hi = ci95(scores) if scores.size > 1 else (float(scores[0]),) * 2
            points.append(ComparisonPoint(name, n_train, n_train / y.size, float(scores.mean()), lo, hi,
                                          int(scores.size), failed[n_train]))
    return SweepResult(points, raw, failures, max_gap)


def cross_calltype(features, individuals, call_types, spec: ClassifierSpec, seed: int = 0) -> dict[str, float]:
    """Train on all call types but one, test on the held-out type; accuracy per held-out type."""
    X = np.asarray(features, dtype=np.float64)
    inds, cts = np.asarray(individuals), np.asarray(call_types)
    out = {}
    for held in dict.fromkeys(cts.tolist()):
        test = cts == held
        model = spec.fit(X[~test], inds[~test], seed=derive_seed(seed, f"crosstype/{held}"))
        out[held] = accuracy(inds[test], model.predict(X[test]))
    return out
