"""Metric tests with independent oracles."""
import numpy as np
import pytest

from mtn.evaluation import (
    LengthMismatch,
    OneClassOnly,
    ScoredPair,
    accuracy,
    binary_metrics,
    embedding_lines,
    export_distributions,
    metrics_report,
    pr_curve,
    precision_at_recall,
    roc_auc,
)


def _pairs(scores, labels):
    return [ScoredPair(float(s), int(l)) for s, l in zip(scores, labels)]


# --- accuracy -----------------------------------------------------------------


def test_accuracy_basics():
    assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
    assert accuracy([1, 2, 3], [3, 1, 2]) == 0.0
    assert accuracy([1, 2, 3, 4], [1, 2, 3, 0]) == 0.75
    with pytest.raises(LengthMismatch):
        accuracy([1], [1, 2])
    with pytest.raises(LengthMismatch):
        accuracy([], [])


# --- binary metrics ----------------------------------------------------------------


def test_perfect_separation():
    pairs = _pairs([0.9] * 5 + [-0.9] * 5, [1] * 5 + [-1] * 5)
    m = binary_metrics(pairs)
    assert m == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_no_positive_predictions():
    pairs = _pairs([-0.5, -0.1, 0.0], [1, 1, -1])
    m = binary_metrics(pairs)
    assert m["precision"] == 0.0 and m["recall"] == 0.0 and m["f1"] == 0.0


def test_hand_counted_fixture():
    # 2 TP, 1 FP, 1 FN
    pairs = _pairs([0.8, 0.7, 0.6, -0.5], [1, 1, -1, 1])
    m = binary_metrics(pairs)
    assert m["precision"] == pytest.approx(2 / 3)
    assert m["recall"] == pytest.approx(2 / 3)
    assert m["f1"] == pytest.approx(2 / 3)


def test_threshold_below_min_gives_recall_one():
    pairs = _pairs([-0.9, -0.2, 0.4], [1, -1, 1])
    m = binary_metrics(pairs, threshold=-1.0)
    assert m["recall"] == 1.0
    assert m["precision"] == pytest.approx(2 / 3)  # prevalence


# --- roc auc ---------------------------------------------------------------------


def _brute_force_auc(pairs):
    pos = [p.score for p in pairs if p.label > 0]
    neg = [p.score for p in pairs if p.label <= 0]
    wins = sum(1.0 if ps > ns else 0.5 if ps == ns else 0.0
               for ps in pos for ns in neg)
    return wins / (len(pos) * len(neg))


def test_auc_endpoints():
    perfect = _pairs([0.9, 0.8, -0.8, -0.9], [1, 1, -1, -1])
    assert roc_auc(perfect) == 1.0
    inverted = _pairs([0.9, 0.8, -0.8, -0.9], [-1, -1, 1, 1])
    assert roc_auc(inverted) == 0.0
    ties = _pairs([0.3] * 6, [1, 1, 1, -1, -1, -1])
    assert roc_auc(ties) == 0.5


def test_auc_matches_brute_force_with_ties():
    rng = np.random.default_rng(12)
    for trial in range(100):
        n = int(rng.integers(10, 200))
        scores = rng.choice(np.round(rng.uniform(-1, 1, 20), 2), size=n)
        labels = rng.choice([1, -1], size=n)
        if len(set(labels)) < 2:
            labels[0] = -labels[0]
        pairs = _pairs(scores, labels)
        assert abs(roc_auc(pairs) - _brute_force_auc(pairs)) < 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(3)
    scores = rng.uniform(-1, 1, 50)
    labels = rng.choice([1, -1], size=50)
    labels[0], labels[1] = 1, -1
    base = roc_auc(_pairs(scores, labels))
    warped = roc_auc(_pairs(np.tanh(3 * scores) + 2, labels))
    assert base == pytest.approx(warped, abs=1e-12)


def test_auc_one_class_raises():
    with pytest.raises(OneClassOnly):
        roc_auc(_pairs([0.1, 0.2], [1, 1]))


# --- pr curve ---------------------------------------------------------------------


def test_pr_perfect_separation():
    pairs = _pairs([0.9, 0.8, -0.8, -0.9], [1, 1, -1, -1])
    assert precision_at_recall(pairs, 0.95) == 1.0


def test_pr_single_positive_ranked_last():
    n = 10
    scores = [1.0 - 0.05 * i for i in range(n)]
    labels = [-1] * (n - 1) + [1]
    pairs = _pairs(scores, labels)
    assert precision_at_recall(pairs, 1.0) == pytest.approx(1 / n)


def test_pr_endpoint_is_prevalence():
    rng = np.random.default_rng(5)
    scores = rng.uniform(-1, 1, 40)
    labels = rng.choice([1, -1], size=40)
    labels[:2] = [1, -1]
    curve = pr_curve(_pairs(scores, labels))
    last_recall, last_precision = curve[-1]
    assert last_recall == 1.0
    assert last_precision == pytest.approx((labels == 1).mean())


def test_p_at_r_monotone_in_target():
    rng = np.random.default_rng(8)
    scores = rng.uniform(-1, 1, 60)
    labels = rng.choice([1, -1], size=60)
    labels[:2] = [1, -1]
    pairs = _pairs(scores, labels)
    values = [precision_at_recall(pairs, t)
              for t in (0.2, 0.4, 0.6, 0.8, 0.9, 1.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_pr_handles_tied_scores_one_point_per_threshold():
    pairs = _pairs([0.5, 0.5, 0.5, -0.5], [1, -1, 1, -1])
    curve = pr_curve(pairs)
    assert len(curve) == 2  # two distinct scores


def test_one_class_only_pr():
    with pytest.raises(OneClassOnly):
        pr_curve(_pairs([0.1], [-1]))


# --- exports ----------------------------------------------------------------------


def test_distribution_mass_placement():
    pairs = _pairs([1.0, 1.0, 1.0], [1, 1, 1])
    hist = export_distributions(pairs, bins=40)
    assert hist["positive"][-1] == 3
    assert sum(hist["positive"]) == 3
    assert sum(hist["negative"]) == 0  # empty class, not an error


def test_distribution_counts_conserved_under_permutation():
    rng = np.random.default_rng(2)
    scores = rng.uniform(-1, 1, 30)
    labels = rng.choice([1, -1], size=30)
    pairs = _pairs(scores, labels)
    base = export_distributions(pairs)
    shuffled = export_distributions([pairs[i]
                                     for i in rng.permutation(30)])
    assert base == shuffled
    assert sum(base["positive"]) == int((labels == 1).sum())


def test_metrics_report_shape():
    rng = np.random.default_rng(4)
    scores = rng.uniform(-1, 1, 50)
    labels = rng.choice([1, -1], size=50)
    labels[:2] = [1, -1]
    report = metrics_report(_pairs(scores, labels), task="clone",
                            variant="mtn-b", seed=7)
    assert set(report) >= {"task", "variant", "seed", "precision", "recall",
                           "f1", "roc_auc", "p_at_r", "pr_curve"}
    assert set(report["p_at_r"]) == {"0.8", "0.9", "0.95", "0.99"}


def test_permutation_invariance_of_metrics():
    rng = np.random.default_rng(9)
    scores = rng.uniform(-1, 1, 40)
    labels = rng.choice([1, -1], size=40)
    labels[:2] = [1, -1]
    pairs = _pairs(scores, labels)
    shuffled = [pairs[i] for i in rng.permutation(40)]
    assert binary_metrics(pairs) == binary_metrics(shuffled)
    assert roc_auc(pairs) == pytest.approx(roc_auc(shuffled), abs=1e-15)
    assert pr_curve(pairs) == pr_curve(shuffled)


def test_embedding_lines_format():
    out = embedding_lines([("a/0.c", 3, [0.5, -1.0]), ("b/1.c", 1, [0.0, 2.0])])
    lines = out.strip().split("\n")
    assert len(lines) == 2
    import json
    rec = json.loads(lines[0])
    assert rec == {"id": "a/0.c", "label": 3, "vector": [0.5, -1.0]}
