import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voiceprint.classifiers import ClassifierSpec
from voiceprint.eval import classifier_comparison, confusion_by_calltype, feature_space_comparison
from voiceprint.eval.experiments import cross_calltype, stratified_subset, sweep_draw
from voiceprint.eval.metrics import MetricSummary, accuracy, ci95, f1_weighted, sem
from voiceprint.eval.parallel import parallel_map
from voiceprint.eval.report import write_confusion_csv, write_json
from voiceprint.eval.svg import comparison_chart, confusion_tables


def _blobs(n_per=(20, 15, 12), d=5, sep=2.0, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((len(n_per), d)) * sep
    X = np.concatenate([c + rng.standard_normal((n, d)) for c, n in zip(centers, n_per)])
    y = np.repeat(np.array(["p", "q", "r"][:len(n_per)]), n_per)
    return X, y


def test_accuracy_examples():
    assert accuracy(["a"] * 49, ["a"] * 45 + ["b"] * 4) == pytest.approx(45 / 49)
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    with pytest.raises(ValueError, match="empty"):
        accuracy([], [])
    with pytest.raises(ValueError, match="length"):
        accuracy([1, 2], [1])


def test_f1_hand_binary():
    # positives: TP=3, FN=1; negatives: TN=5, FP=1
    y_true = [1, 1, 1, 1] + [0] * 6
    y_pred = [1, 1, 1, 0] + [1] + [0] * 5
    # class 1: P = R = 3/4; class 0: P = R = 5/6; weights 4 and 6
    assert f1_weighted(y_true, y_pred) == pytest.approx((4 * 0.75 + 6 * 5 / 6) / 10, abs=1e-15)


def test_f1_absent_prediction_contributes_zero():
    assert f1_weighted(["a", "a", "b"], ["b", "b", "b"]) == pytest.approx((2 * 0 + 1 * (2 / 4)) / 3)


def test_sem_and_ci():
    assert sem([0.8, 0.9]) == pytest.approx(0.05)
    lo, hi = ci95([0.8, 0.9])
    assert (hi - lo) / 2 == pytest.approx(1.96 * 0.05)
    assert (hi - lo) / 2 == pytest.approx(0.098, abs=1e-12)
    with pytest.raises(ValueError):
        ci95([0.5])


def test_single_replicate_degenerate():
    s = MetricSummary.of("accuracy", [0.7])
    assert s.sem == 0.0 and s.degenerate


def test_ci_width_shrinks_as_inverse_sqrt():
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(50):
        a = rng.binomial(49, 0.85, 400) / 49
        lo1, hi1 = ci95(a[:100])
        lo4, hi4 = ci95(a)
        ratios.append((hi4 - lo4) / (hi1 - lo1))
    assert abs(np.mean(ratios) - 0.5) <= 0.05


def _hand_mean_sem(values):
    n = len(values)
    m = sum(values) / n
    sd = math.sqrt(sum((v - m) ** 2 for v in values) / (n - 1))
    return m, sd / math.sqrt(n)


def test_five_replicate_summary_matches_hand(table1_features):
    t = table1_features["mfcc"]
    specs = (ClassifierSpec("svm"), ClassifierSpec("nb"))
    res = classifier_comparison(t.X, t.individuals, specs, n_reps=5, master_seed=3)
    for name in ("svm", "nb"):
        for metric in ("accuracy", "f1_weighted"):
            vals = [o.scores[metric] for o in res.outcomes if o.classifier == name]
            m, s = _hand_mean_sem(vals)
            summ = res.summaries[name][metric]
            assert len(vals) == 5 == summ.n_replicates
            assert summ.mean == pytest.approx(m, rel=0, abs=1e-15)
            assert summ.sem == pytest.approx(s, rel=0, abs=1e-15)


def test_comparison_deterministic_and_jobs_invariant():
    X, y = _blobs()
    specs = (ClassifierSpec("svm"), ClassifierSpec("rf", {"n_trees": 5}))
    a = classifier_comparison(X, y, specs, n_reps=4, master_seed=1, jobs=1)
    b = classifier_comparison(X, y, specs, n_reps=4, master_seed=1, jobs=2)
    assert a.to_dict() == b.to_dict()
    assert a.raw_rows() == b.raw_rows()
    c = classifier_comparison(X, y, specs, n_reps=4, master_seed=2)
    assert a.to_dict() != c.to_dict()


def test_comparison_partition_sizes():
    X, y = _blobs(n_per=(72, 67, 56))
    res = classifier_comparison(X, y, (ClassifierSpec("nb"),), n_reps=3, master_seed=0)
    for o in res.outcomes:
        assert o.n_train == 146 and o.test_index.size == 49


def test_single_replicate_flagged():
    X, y = _blobs()
    res = classifier_comparison(X, y, (ClassifierSpec("nb"),), n_reps=1)
    assert res.summaries["nb"]["accuracy"].degenerate
    assert res.to_dict()["summaries"]["nb"]["accuracy"]["sem"] == 0.0


def test_failed_replicates_recorded():
    X, y = _blobs()
    res = classifier_comparison(X, y, (ClassifierSpec("gp", {"newton_max_iter": 1}), ClassifierSpec("nb")),
                                n_reps=3)
    assert len(res.failures) == 3
    assert "gp" not in res.summaries and "nb" in res.summaries
    assert res.to_dict()["failures"][0]["classifier"] == "gp"


def _planted():
    inds = ["A"] * 1000 + ["B"] * 10 + ["C"] * 10
    cts = ["scream"] * 1020
    pred = ["A"] * 875 + ["B"] * 103 + ["C"] * 22 + ["B"] * 10 + ["C"] * 10
    return inds, cts, [(np.arange(1020), np.array(pred))]


def test_planted_confusion_row(tmp_path):
    inds, cts, preds = _planted()
    mats, omitted = confusion_by_calltype(preds, inds, cts)
    assert omitted == []
    a = mats[0]
    assert a.individual == "A" and a.predicted == ("A", "B", "C")
    np.testing.assert_allclose(a.proportions[0], [0.875, 0.103, 0.022], rtol=0, atol=1e-12)
    write_confusion_csv(mats, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert "A,scream,B,103,0.103" in lines
    write_json({"m": [m.to_dict() for m in mats]}, tmp_path / "c.json")
    assert '"proportions"' in (tmp_path / "c.json").read_text()


def test_confusion_perfect_and_random():
    rng = np.random.default_rng(0)
    inds = rng.choice(["A", "B", "C"], 300)
    cts = rng.choice(["scream", "pant_hoot_intro", "pant_hoot_climax"], 300)
    perfect, _ = confusion_by_calltype([(np.arange(300), inds)], inds, cts)
    for m in perfect:
        j = m.predicted.index(m.individual)
        assert np.all(m.proportions[:, j] == 1.0)
    preds = [(rng.choice(300, 60, replace=False), None) for _ in range(20)]
    preds = [(idx, rng.choice(["A", "B", "C"], 60)) for idx, _ in preds]
    mats, _ = confusion_by_calltype(preds, inds, cts)
    correct = sum(int(np.sum(p == inds[i])) for i, p in preds)
    total = sum(len(i) for i, _ in preds)
    pooled_correct = sum(m.counts[:, m.predicted.index(m.individual)].sum() for m in mats)
    assert pooled_correct / total == pytest.approx(correct / total, abs=1e-12)
    for m in mats:
        np.testing.assert_allclose(m.proportions.sum(axis=1), 1.0, atol=1e-9)


def test_confusion_omits_unseen_cells(caplog):
    inds = ["A", "A", "B"]
    cts = ["scream", "pant_hoot_intro", "scream"]
    mats, omitted = confusion_by_calltype([(np.array([0, 2]), np.array(["A", "B"]))], inds, cts)
    assert omitted == [("A", "pant_hoot_intro"), ("B", "pant_hoot_intro")]
    assert mats[0].call_types == ("scream",)
    assert "no test occurrences" in caplog.text


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 30), min_size=2, max_size=4), st.integers(0, 10 ** 6), st.data())
def test_stratified_subset_exact(sizes, seed, data):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n_train = data.draw(st.integers(len(sizes), labels.size - len(sizes)))
    idx = stratified_subset(labels, n_train, np.random.default_rng(seed))
    assert idx.size == n_train == np.unique(idx).size
    got = np.bincount(labels[idx], minlength=len(sizes))
    assert np.all(got >= 1) and np.all(got <= np.array(sizes) - 1)


def test_stratified_subset_errors():
    labels = np.array([0, 0, 1, 1, 2, 2])
    with pytest.raises(ValueError):
        stratified_subset(labels, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        stratified_subset(labels, 4, np.random.default_rng(0))


def test_sweep_draws_stay_in_bin():
    y = np.repeat([0, 1, 2], 30)
    for r in range(50):
        _, C = sweep_draw(y, 20, (10.0, 100.0), 4, 2, r)
        assert 10.0 <= C <= 100.0


def test_feature_space_comparison_shape_and_pairing():
    X, y = _blobs(n_per=(25, 25, 25))
    res = feature_space_comparison({"a": X, "b": X.copy()}, y, train_grid=(6, 30), per_bin=3, master_seed=5)
    assert len(res.points) == 4
    assert all(p.n_replicates == 12 for p in res.points)
    a = [p for p in res.points if p.feature_space == "a"]
    b = [p for p in res.points if p.feature_space == "b"]
    # identical inputs and shared draws give identical curves
    assert [(p.mean_accuracy, p.ci95_low, p.ci95_high) for p in a] == \
           [(p.mean_accuracy, p.ci95_low, p.ci95_high) for p in b]
    again = feature_space_comparison({"a": X, "b": X.copy()}, y, train_grid=(6, 30), per_bin=3, master_seed=5,
                                     jobs=2)
    assert again.points == res.points and again.raw == res.raw
    assert res.max_kkt_gap <= 1e-3


def test_feature_space_comparison_errors():
    X, y = _blobs(n_per=(5, 5, 5))
    with pytest.raises(ValueError, match="smaller than the dataset"):
        feature_space_comparison({"a": X}, y, train_grid=(15,))
    with pytest.raises(ValueError, match="rows"):
        feature_space_comparison({"a": X[:5]}, y)


def test_cross_calltype_reports_each_held_out_type(table1_features):
    spec = ClassifierSpec("svm")
    shared = cross_calltype(table1_features["mfcc"].X, table1_features["mfcc"].individuals,
                            table1_features["mfcc"].call_types, spec)
    assert set(shared) == {"scream", "pant_hoot_intro", "pant_hoot_climax"}
    assert all(0.0 <= v <= 1.0 for v in shared.values())


def test_parallel_map_ordered():
    assert parallel_map(_scaled, list(range(12)), 3, jobs=2) == [3 * i for i in range(12)]
    assert parallel_map(_scaled, [], 3, jobs=2) == []


def _scaled(ctx, i):
    return ctx * i


def test_svg_outputs_well_formed():
    import xml.etree.ElementTree as ET
    X, y = _blobs(n_per=(25, 25, 25))
    res = feature_space_comparison({"mfcc": X, "learnt": X}, y, train_grid=(6, 30), per_bin=2)
    ET.fromstring(comparison_chart(res.points))
    inds, cts, preds = _planted()
    mats, _ = confusion_by_calltype(preds, inds, cts)
    ET.fromstring(confusion_tables(mats))
