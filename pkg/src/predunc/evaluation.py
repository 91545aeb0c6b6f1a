"""ROC, precision-recall and accuracy curves plus misprediction detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AllCorrect,
    AllWrong,
    EmptyInput,
    EvalCurve,
    LabelVector,
    NoPositives,
    ScoreVector,
    SingleClass,
    UncertaintyVector,
    check_aligned,
)
from .decision import PredictionVector, classify_plain

PLATEAU_FRACTION = 0.95


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True, eq=False)
class MispredictionTask:
    threshold: float
    mispredicted: np.ndarray
    detector: UncertaintyVector
    accuracy: float


def _values(x) -> np.ndarray:
    for attr in ("scores", "values", "labels", "predictions"):
        if hasattr(x, attr):
            return np.asarray(getattr(x, attr))
    return np.asarray(x)


def confusion(pred, labels) -> ConfusionCounts:
    p = _values(pred).astype(bool)
    y = _values(labels).astype(bool)
    check_aligned(p.shape[0], y.shape[0])
    tp = int(np.count_nonzero(p & y))
    fp = int(np.count_nonzero(p & ~y))
    fn = int(np.count_nonzero(~p & y))
    tn = int(p.shape[0] - tp - fp - fn)
    return ConfusionCounts(tp, fp, tn, fn)


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total == 0:
        raise EmptyInput("accuracy of zero predictions is undefined")
    return (counts.tp + counts.tn) / counts.total


def _ranked_counts(scores, labels):
    """Cumulative (tp, fp) at each distinct score, highest score first."""
    s = np.asarray(_values(scores), dtype=np.float64)
    y = _values(labels).astype(bool)
    check_aligned(s.shape[0], y.shape[0])
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each block of tied scores
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    return s[last], tp, fp


def roc_curve(scores, labels) -> EvalCurve:
    """ROC points (threshold, FPR, TPR) with a trapezoidal AUC.

    A point is emitted for every distinct score (predict positive when
    score >= threshold), bracketed by sentinels at +inf -> (0, 0) and
    -inf -> (1, 1).
    """
    thr, tp, fp = _ranked_counts(scores, labels)
    n_pos, n_neg = (int(tp[-1]), int(fp[-1])) if thr.size else (0, 0)
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both positive and negative labels")
    tp = np.r_[0, tp]
    fp = np.r_[0, fp]
    # trapezoids in integer counts, one division at the end
    area = np.sum(np.diff(fp) * (tp[1:] + tp[:-1])) / (2.0 * n_pos * n_neg)
    thresholds = np.r_[np.inf, thr, -np.inf]
    fpr = np.r_[fp / n_neg, 1.0]
    tpr = np.r_[tp / n_pos, 1.0]
    return EvalCurve("roc", thresholds, fpr, tpr, float(area))


def pr_curve(scores, labels) -> EvalCurve:
    """Precision-recall points (threshold, recall, precision) with average precision.

    AP is the step-wise sum over distinct thresholds of
    (R_k - R_{k-1}) * P_k, without linear interpolation.
    """
    thr, tp, fp = _ranked_counts(scores, labels)
    n_pos = int(tp[-1]) if thr.size else 0
    if n_pos == 0:
        raise NoPositives("precision-recall needs at least one positive label")
    recall = tp / n_pos
    precision = tp / (tp + fp)
    ap = float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
    return EvalCurve("pr", thr, recall, precision, ap)


def roc_auc(scores, labels) -> float:
    return roc_curve(scores, labels).auc


def pr_auc(scores, labels) -> float:
    return pr_curve(scores, labels).auc


def auc_oracle(scores, labels) -> float:
    """Pairwise-count AUC: P(score_pos > score_neg) + 0.5 P(tie), by full enumeration."""
    s = np.asarray(_values(scores), dtype=np.float64)
    y = _values(labels).astype(bool)
    check_aligned(s.shape[0], y.shape[0])
    pos, neg = s[y], s[~y]
    if pos.size == 0 or neg.size == 0:
        raise SingleClass("AUC needs both positive and negative labels")
    wins = 0
    ties = 0
    for p in pos:
        wins += int(np.count_nonzero(p > neg))
        ties += int(np.count_nonzero(p == neg))
    return (wins + 0.5 * ties) / (pos.size * neg.size)


@dataclass(frozen=True, eq=False)
class AccuracyCurve(EvalCurve):
    """Accuracy versus threshold, with plateau summary statistics."""

    @property
    def max_accuracy(self) -> float:
        return float(self.y.max())

    @property
    def argmax_threshold(self) -> float:
        return float(self.thresholds[int(np.argmax(self.y))])

    def plateau_width(self, fraction: float = PLATEAU_FRACTION) -> float:
        """Threshold measure where accuracy >= fraction * max accuracy.

        Each sweep point owns the half-intervals to its neighbours, so a
        flat curve covers the whole sweep range.
        """
        t = self.thresholds
        if t.size == 1:
            return 0.0
        mid = (t[1:] + t[:-1]) / 2.0
        lo = np.r_[t[0], mid]
        hi = np.r_[mid, t[-1]]
        keep = self.y >= fraction * self.max_accuracy
        return float(np.sum((hi - lo)[keep]))

    def summary(self, fraction: float = PLATEAU_FRACTION) -> dict:
        return {
            "max_accuracy": self.max_accuracy,
            "argmax_threshold": self.argmax_threshold,
            "plateau_width": self.plateau_width(fraction),
        }


def accuracy_curve(sweep, labels) -> AccuracyCurve:
    if not sweep:
        raise EmptyInput("accuracy curve needs at least one sweep entry")
    y = _values(labels).astype(bool)
    ts = np.empty(len(sweep))
    acc = np.empty(len(sweep))
    for k, (t, pred) in enumerate(sweep):
        p = _values(pred).astype(bool)
        check_aligned(p.shape[0], y.shape[0])
        ts[k] = t
        acc[k] = np.count_nonzero(p == y) / y.shape[0]
    return AccuracyCurve("accuracy", ts, ts, acc)


def misprediction_labels(pred, labels) -> np.ndarray:
    p = _values(pred).astype(bool)
    y = _values(labels).astype(bool)
    check_aligned(p.shape[0], y.shape[0])
    return (p != y).astype(np.int8)


def misprediction_detection(scores: ScoreVector, labels: LabelVector, detector: UncertaintyVector,
                            t: float):
    """Score the detector's ability to rank wrong predictions of the plain classifier at ``t``.

    Returns the task and the ROC-AUC of detector values against the
    misprediction labels.
    """
    check_aligned(len(scores), len(labels), len(detector))
    pred = classify_plain(scores, t)
    wrong = misprediction_labels(pred, labels)
    n_wrong = int(wrong.sum())
    if n_wrong == 0:
        raise AllCorrect(f"no mispredictions at threshold {t}")
    if n_wrong == wrong.shape[0]:
        raise AllWrong(f"every prediction is wrong at threshold {t}")
    task = MispredictionTask(float(t), wrong, detector, 1.0 - n_wrong / wrong.shape[0])
    return task, roc_auc(detector.values, wrong)
