"""Classification metrics: one-vs-rest per class, macro-averaged.

A metric whose denominator is zero is defined as 0 and still counts toward
the macro mean.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ShapeError

__all__ = [
    "METRIC_NAMES",
    "ConfusionMatrix",
    "MetricsReport",
    "confusion",
    "scalar_metrics",
    "roc_auc",
    "aggregate_runs",
]

METRIC_NAMES = (
    "accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "macro_fpr",
    "macro_fnr",
    "roc_auc",
)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, columns = predicted class

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_fpr: float
    macro_fnr: float
    roc_auc: Optional[float] = None
    per_class: Dict[str, List[float]] = field(default_factory=dict)
    confusion: Optional[List[List[int]]] = None

    def scalars(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> dict:
        out = dict(self.scalars())
        out["per_class"] = {k: list(v) for k, v in self.per_class.items()}
        out["confusion"] = self.confusion
        return out


def confusion(labels, predictions, n_classes: int) -> ConfusionMatrix:
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if labels.shape != predictions.shape:
        raise ShapeError(f"{labels.shape[0]} labels but {predictions.shape[0]} predictions")
    if labels.size == 0:
        raise ValueError("cannot build a confusion matrix from zero samples")
    for name, arr in (("label", labels), ("prediction", predictions)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise IndexError(f"{name} outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    return ConfusionMatrix(counts)


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def scalar_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Everything except ROC-AUC, computed in exact rational arithmetic."""
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    per = {"precision": [], "recall": [], "f1": [], "fpr": [], "fnr": []}
    for c in range(cm.n_classes):
        tp = int(counts[c, c])
        fn = int(counts[c].sum()) - tp
        fp = int(counts[:, c].sum()) - tp
        tn = total - tp - fn - fp
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        per["precision"].append(precision)
        per["recall"].append(recall)
        per["f1"].append(
            2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
        )
        per["fpr"].append(_ratio(fp, fp + tn))
        per["fnr"].append(_ratio(fn, fn + tp))

    def macro(key):
        return float(sum(per[key], Fraction(0)) / cm.n_classes)

    return MetricsReport(
        accuracy=float(Fraction(int(np.trace(counts)), total)),
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
        macro_fpr=macro("fpr"),
        macro_fnr=macro("fnr"),
        per_class={k: [float(v) for v in vals] for k, vals in per.items()},
        confusion=counts.tolist(),
    )


def _rank_auc(positive: np.ndarray, scores: np.ndarray) -> float:
    # Mann-Whitney U via average ranks; ties contribute 1/2.
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(scores.size)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def roc_auc(labels, scores, n_classes: Optional[int] = None) -> float:
    """Rank-based ROC-AUC.

    With 1-D ``scores`` the task is binary and the scores belong to class 1.
    With 2-D ``scores`` (one column per class) this is the one-vs-rest macro
    average over classes present in ``labels`` alongside at least one other.
    """
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=float)
    if scores.shape[0] != labels.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels but {scores.shape[0]} score rows")
    if np.unique(labels).size < 2:
        raise ValueError("ROC-AUC is undefined when only one class is present")
    if scores.ndim == 1:
        return _rank_auc(labels == 1, scores)
    n_classes = scores.shape[1] if n_classes is None else n_classes
    aucs = [
        _rank_auc(labels == c, scores[:, c])
        for c in range(n_classes)
        if 0 < np.count_nonzero(labels == c) < labels.size
    ]
    return float(np.mean(aucs))


def aggregate_runs(reports: Sequence[MetricsReport]) -> Dict[str, Dict[str, float]]:
    """Per-metric mean and sample (n-1) standard deviation; one run gives std 0."""
    if not reports:
        raise ValueError("need at least one report to aggregate")
    out = {}
    for name in METRIC_NAMES:
        values = [getattr(r, name) for r in reports]
        if any(v is None for v in values):
            continue
        values = [float(v) for v in values]
        # statistics works in exact arithmetic, so equal runs give std exactly 0
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        out[name] = {"mean": statistics.mean(values), "std": std}
    return out
