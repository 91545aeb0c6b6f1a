"""Domain types and validation shared by the rest of the package.

A ``SampleSet`` holds, for each of N inputs, T repeated softmax predictions
over C classes (MC dropout passes, ensemble members or test-time
augmentations all reduce to this shape). Class index 1 is always the
positive (tumour) class.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

POSITIVE_CLASS = 1

ROW_SUM_TOL = 1e-6
# rows already at machine precision are left untouched (keeps validation idempotent)
RENORM_TOL = 1e-12

PROVENANCES = ("single-model", "sample-mean", "external", "combined")


class PreduncError(Exception):
    """Base class for all package errors."""


class ValidationError(PreduncError, ValueError):
    """Input data violates a structural invariant."""


class NonFinite(ValidationError):
    pass


class RowSumViolation(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class NotBinary(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class InsufficientSamples(ValidationError):
    pass


class NegativeInput(ValidationError):
    pass


class EvaluationError(PreduncError, ValueError):
    """An evaluation quantity is undefined for the given data."""


class SingleClass(EvaluationError):
    pass


class NoPositives(EvaluationError):
    pass


class DegenerateMispredictions(SingleClass):
    """Misprediction labels contain one class only."""


class AllCorrect(DegenerateMispredictions):
    pass


class AllWrong(DegenerateMispredictions):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N x T x C class-probability samples with one identifier per input."""

    probs: np.ndarray
    input_ids: tuple

    @property
    def n_inputs(self) -> int:
        return self.probs.shape[0]

    @property
    def n_samples(self) -> int:
        return self.probs.shape[1]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[2]

    def positive(self) -> np.ndarray:
        """Positive-class probabilities, shape (N, T)."""
        require_binary(self)
        return self.probs[:, :, POSITIVE_CLASS]

    def subset(self, index) -> "SampleSet":
        index = np.asarray(index)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        ids = tuple(self.input_ids[i] for i in index)
        return SampleSet(_frozen(self.probs[index]), ids)

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self.input_ids == other.input_ids and np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LabelVector:
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise ValidationError("labels must be 0 or 1")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int8)))

    def __len__(self):
        return self.labels.shape[0]


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """P(positive class) per input."""

    scores: np.ndarray
    provenance: str = "external"

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ValidationError("scores must be one-dimensional")
        if not np.all(np.isfinite(scores)):
            raise NonFinite("scores contain NaN or Inf")
        if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
            raise ValidationError("scores must lie in [0, 1]")
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "scores", _frozen(scores))

    def __len__(self):
        return self.scores.shape[0]


@dataclass(frozen=True, eq=False)
class UncertaintyVector:
    values: np.ndarray
    metric: str
    method: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError("uncertainty values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise NonFinite("uncertainty values contain NaN or Inf")
        if values.size and values.min() < 0.0:
            raise NegativeInput("uncertainty values must be nonnegative")
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class EvalCurve:
    """Ordered (threshold, x, y) points of a ROC, PR or accuracy curve.

    ROC and PR points run from the highest threshold to the lowest, so x
    (FPR or recall) is nondecreasing. Accuracy points follow the sweep
    order, ascending in threshold.
    """

    kind: str
    thresholds: np.ndarray
    x: np.ndarray
    y: np.ndarray
    auc: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("roc", "pr", "accuracy"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        for name in ("thresholds", "x", "y"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.float64)))

    @property
    def points(self) -> list:
        return list(zip(self.thresholds.tolist(), self.x.tolist(), self.y.tolist()))

    def __len__(self):
        return self.thresholds.shape[0]


def validate_sample_set(raw, ids: Optional[Sequence] = None) -> SampleSet:
    """Check an N x T x C array and wrap it in a :class:`SampleSet`.

    Rows whose sum is within ``ROW_SUM_TOL`` of 1 are divided by their sum;
    rows further off raise :class:`RowSumViolation`. When ``ids`` is omitted
    the inputs are numbered ``0..N-1``.
    """
    probs = np.array(raw, dtype=np.float64)
    if probs.ndim != 3:
        raise ValidationError(f"expected an N x T x C array, got {probs.ndim} dimensions")
    n, t, c = probs.shape
    if n == 0 or t == 0:
        raise EmptyInput("sample set needs at least one input and one sample")
    if c < 2:
        raise ValidationError("at least two classes are required")
    if not np.all(np.isfinite(probs)):
        raise NonFinite("probabilities contain NaN or Inf")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValidationError("probabilities must lie in [0, 1]")

    sums = probs.sum(axis=2)
    dev = np.abs(sums - 1.0)
    if np.any(dev > ROW_SUM_TOL):
        i, j = np.argwhere(dev > ROW_SUM_TOL)[0]
        raise RowSumViolation(f"input {i}, sample {j}: probabilities sum to {sums[i, j]!r}")
    fix = dev > RENORM_TOL
    if np.any(fix):
        probs[fix] = probs[fix] / sums[fix][:, None]
        np.clip(probs, 0.0, 1.0, out=probs)

    if ids is None:
        ids = tuple(range(n))
    else:
        ids = tuple(ids)
    if len(ids) != n:
        raise LengthMismatch(f"{len(ids)} identifiers for {n} inputs")
    if len(set(ids)) != n:
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise DuplicateId(f"duplicate input id {dup!r}")
    return SampleSet(_frozen(probs), ids)


def require_binary(samples: SampleSet) -> None:
    if samples.n_classes != 2:
        raise NotBinary(f"operation needs C = 2, got C = {samples.n_classes}")


def check_aligned(*lengths: int) -> int:
    if len(set(lengths)) > 1:
        raise LengthMismatch(f"length mismatch: {lengths}")
    return lengths[0]


def positive_scores(samples: SampleSet, sample_index: int = 0) -> ScoreVector:
    """Take one designated sample per input as the single-model score."""
    require_binary(samples)
    if not 0 <= sample_index < samples.n_samples:
        raise IndexOutOfRange(f"sample index {sample_index} outside 0..{samples.n_samples - 1}")
    return ScoreVector(samples.probs[:, sample_index, POSITIVE_CLASS].copy(), "single-model")
