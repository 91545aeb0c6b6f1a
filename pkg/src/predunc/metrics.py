"""Per-input uncertainty metrics computed from repeated predictions.

All logarithms are natural. Probabilities are clamped to ``[LOG_EPS, 1]``
inside logarithms only, so a deterministic prediction has entropy exactly 0.
"""
from __future__ import annotations

import enum

import numpy as np

from .core import (
    InsufficientSamples,
    SampleSet,
    ScoreVector,
    UncertaintyVector,
    require_binary,
)

LOG_EPS = 1e-12


class MetricKind(str, enum.Enum):
    SAMPLE_MEAN = "sample-mean"
    SAMPLE_VARIANCE = "sample-variance"
    ENTROPY = "entropy"
    MUTUAL_INFORMATION = "mutual-information"
    BASELINE = "baseline"

    @property
    def needs_samples(self) -> bool:
        return self is not MetricKind.BASELINE


SAMPLE_METRICS = (
    MetricKind.SAMPLE_MEAN,
    MetricKind.SAMPLE_VARIANCE,
    MetricKind.ENTROPY,
    MetricKind.MUTUAL_INFORMATION,
)


def _plogp(p: np.ndarray) -> np.ndarray:
    return p * np.log(np.clip(p, LOG_EPS, 1.0))


def _softmax_uncertainty(s: np.ndarray) -> np.ndarray:
    # 1 - 2(s - 0.5)^2; lies in [0.5, 1] for s in [0, 1]
    return 1.0 - 2.0 * (s - 0.5) ** 2


def mean_softmax(samples: SampleSet) -> ScoreVector:
    """Average positive-class score over the T samples of each input."""
    pos = samples.positive()
    return ScoreVector(np.clip(pos.mean(axis=1), 0.0, 1.0), "sample-mean")


def sample_mean_uncertainty(samples: SampleSet, method: str = "") -> UncertaintyVector:
    """Sample mean uncertainty ``1 - 2(mean_s - 0.5)^2``.

    Peaks at 1 when the mean positive score is 0.5 and falls to 0.5 when
    the mean is 0 or 1.
    """
    s_bar = mean_softmax(samples).scores
    return UncertaintyVector(_softmax_uncertainty(s_bar), MetricKind.SAMPLE_MEAN.value, method)


def sample_variance(samples: SampleSet, method: str = "") -> UncertaintyVector:
    """Unbiased variance of the positive-class probability across samples."""
    pos = samples.positive()
    if samples.n_samples < 2:
        raise InsufficientSamples("sample variance needs T >= 2")
    # deviations from the first sample make constant rows exactly 0
    d = pos - pos[:, :1]
    t = samples.n_samples
    var = (np.sum(d * d, axis=1) - np.sum(d, axis=1) ** 2 / t) / (t - 1)
    var = np.maximum(var, 0.0)
    return UncertaintyVector(var, MetricKind.SAMPLE_VARIANCE.value, method)


def predictive_entropy(samples: SampleSet, method: str = "") -> UncertaintyVector:
    """Shannon entropy of the sample-mean class distribution."""
    p_bar = samples.probs.mean(axis=1)
    h = -_plogp(p_bar).sum(axis=1)
    return UncertaintyVector(np.maximum(h, 0.0), MetricKind.ENTROPY.value, method)


def expected_entropy(samples: SampleSet) -> np.ndarray:
    """Mean over samples of each individual prediction's entropy."""
    per_sample = -_plogp(samples.probs).sum(axis=2)
    return per_sample.mean(axis=1)


def mutual_information(samples: SampleSet, method: str = "") -> UncertaintyVector:
    """Entropy of the mean prediction minus the mean entropy, clamped at 0."""
    p_bar = samples.probs.mean(axis=1)
    h = -_plogp(p_bar).sum(axis=1)
    mi = h - expected_entropy(samples)
    return UncertaintyVector(np.maximum(mi, 0.0), MetricKind.MUTUAL_INFORMATION.value, method)


def baseline_uncertainty(scores: ScoreVector, method: str = "") -> UncertaintyVector:
    """Softmax-only uncertainty ``1 - 2(s - 0.5)^2`` from a single score per input."""
    return UncertaintyVector(_softmax_uncertainty(scores.scores), MetricKind.BASELINE.value, method)


_SAMPLE_FUNCS = {
    MetricKind.SAMPLE_MEAN: sample_mean_uncertainty,
    MetricKind.SAMPLE_VARIANCE: sample_variance,
    MetricKind.ENTROPY: predictive_entropy,
    MetricKind.MUTUAL_INFORMATION: mutual_information,
}


def compute(kind, samples: SampleSet = None, scores: ScoreVector = None, method: str = "") -> UncertaintyVector:
    """Dispatch on ``MetricKind``; the baseline needs ``scores``, the rest ``samples``."""
    kind = MetricKind(kind)
    if kind is MetricKind.BASELINE:
        if scores is None:
            raise TypeError("baseline uncertainty needs a ScoreVector")
        return baseline_uncertainty(scores, method)
    if samples is None:
        raise TypeError(f"{kind.value} needs a SampleSet")
    return _SAMPLE_FUNCS[kind](samples, method)
