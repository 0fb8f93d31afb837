from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmalsim.metrics import aggregate_runs, confusion, roc_auc, scalar_metrics

LABELS = [1, 0, 0, 1]
PREDS = [1, 0, 1, 1]


def brute_auc(labels, scores):
    pos = [s for l, s in zip(labels, scores) if l == 1]
    neg = [s for l, s in zip(labels, scores) if l != 1]
    wins = sum(Fraction(1) if p > n else Fraction(1, 2) if p == n else Fraction(0) for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def test_confusion_hand_tally():
    assert confusion(LABELS, PREDS, 2).counts.tolist() == [[1, 1], [0, 2]]
    assert confusion([0, 1, 2], [0, 1, 2], 3).counts.tolist() == np.eye(3, dtype=int).tolist()
    with pytest.raises(ValueError):
        confusion([], [], 2)
    with pytest.raises(IndexError):
        confusion([0, 3], [0, 1], 2)


def test_scalar_metrics_hand_example():
    r = scalar_metrics(confusion(LABELS, PREDS, 2))
    assert r.accuracy == 0.75
    assert r.macro_precision == float(Fraction(5, 6))
    assert r.macro_recall == 0.75
    assert r.macro_f1 == float((Fraction(2, 3) + Fraction(4, 5)) / 2)
    assert r.macro_f1 == pytest.approx(0.7333, abs=1e-4)
    assert r.macro_fpr == 0.25
    assert r.macro_fnr == 0.25


def test_perfect_predictions():
    r = scalar_metrics(confusion([0, 1, 2, 1], [0, 1, 2, 1], 3))
    assert (r.macro_precision, r.macro_recall, r.macro_f1) == (1.0, 1.0, 1.0)
    assert (r.macro_fpr, r.macro_fnr) == (0.0, 0.0)


def test_single_predicted_class_zero_denominator():
    r = scalar_metrics(confusion([0, 0, 1, 1], [1, 1, 1, 1], 2))
    assert r.accuracy == 0.5
    assert r.per_class["precision"] == [0.0, 0.5]
    assert r.macro_precision == 0.25


def test_roc_auc_examples():
    assert roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == 0.75
    assert roc_auc([0, 0, 1, 1], [0.1, 0.2, 0.7, 0.9]) == 1.0
    assert roc_auc([0, 1, 0, 1], [0.3] * 4) == 0.5
    with pytest.raises(ValueError):
        roc_auc([1, 1, 1], [0.1, 0.2, 0.3])


def test_roc_auc_multiclass_skips_absent_class():
    labels = [0, 0, 1, 1]
    scores = np.array([[0.8, 0.1, 0.1], [0.4, 0.5, 0.1], [0.2, 0.7, 0.1], [0.5, 0.3, 0.2]])
    expected = (brute_auc([1, 1, 0, 0], scores[:, 0]) + brute_auc(labels, scores[:, 1])) / 2
    assert roc_auc(labels, scores) == float(expected)


def test_aggregate_runs():
    r = scalar_metrics(confusion(LABELS, PREDS, 2))
    agg = aggregate_runs([r, r, r])
    assert agg["accuracy"] == {"mean": 0.75, "std": 0.0}
    a, b = scalar_metrics(confusion([0, 1], [0, 0], 2)), scalar_metrics(confusion([0, 1], [0, 1], 2))
    a.accuracy, b.accuracy = 0.8, 1.0
    agg = aggregate_runs([a, b])
    assert agg["accuracy"]["mean"] == pytest.approx(0.9)
    assert agg["accuracy"]["std"] == pytest.approx(0.1414, abs=1e-4)
    assert aggregate_runs([a])["accuracy"]["std"] == 0.0
    with pytest.raises(ValueError):
        aggregate_runs([])


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=40),
    perm=st.permutations([0, 1, 2]),
)
def test_relabel_and_order_invariance(data, perm):
    labels = np.array([d[0] for d in data])
    preds = np.array([d[1] for d in data])
    base = scalar_metrics(confusion(labels, preds, 3)).scalars()
    p = np.array(perm)
    relabeled = scalar_metrics(confusion(p[labels], p[preds], 3)).scalars()
    order = np.random.default_rng(len(data)).permutation(len(data))
    shuffled = scalar_metrics(confusion(labels[order], preds[order], 3)).scalars()
    for key in base:
        if base[key] is None:
            continue
        assert relabeled[key] == pytest.approx(base[key], abs=1e-15)
        assert shuffled[key] == base[key]
        assert 0 <= base[key] <= 1


@settings(max_examples=60, deadline=None)
@given(a=st.integers(0, 20), b=st.integers(0, 20), c=st.integers(0, 20))
def test_binary_fpr_equals_fnr_when_symmetric(a, b, c):
    # [[a, b], [b, c]] is symmetric under class swap in the off-diagonals
    labels = [0] * (a + b) + [1] * (b + c)
    preds = [0] * a + [1] * b + [0] * b + [1] * c
    if not labels:
        return
    r = scalar_metrics(confusion(labels, preds, 2))
    assert r.macro_fpr == pytest.approx(r.macro_fnr, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=30, unique=True), st.integers(0, 2**31))
def test_auc_complement_and_brute_force(scores, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=len(scores))
    labels[0], labels[1] = 0, 1
    scores = np.array(scores)
    auc = roc_auc(labels, scores)
    assert auc == pytest.approx(float(brute_auc(labels, scores)), abs=1e-12)
    assert auc + roc_auc(labels, -scores) == pytest.approx(1.0, abs=1e-12)
