"""Plain thresholding and the 2D score/uncertainty decision boundary.

The combined rule predicts positive when

    f(u, s) = ((u / P_u)^y + s^y)^(1/y) > t

where ``P_u`` rescales uncertainties to roughly [0, 1] and the exponent
``y`` moves the iso-curves from circular (y = 2) towards square.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import (
    EmptyInput,
    NegativeInput,
    ScoreVector,
    UncertaintyVector,
    ValidationError,
    check_aligned,
)

DEFAULT_EXPONENT = 10.0
DEFAULT_PERCENTILE = 99.0
MIN_NORMALIZER = 1e-12


@dataclass(frozen=True)
class DecisionConfig:
    threshold: float = 0.5
    exponent: float = DEFAULT_EXPONENT
    normalizer: float = 1.0
    percentile: float = DEFAULT_PERCENTILE

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValidationError(f"threshold must be >= 0, got {self.threshold}")
        if not self.exponent >= 1:
            raise ValidationError(f"exponent must be >= 1, got {self.exponent}")
        if not self.normalizer > 0:
            raise ValidationError(f"normalizer must be > 0, got {self.normalizer}")
        if not 0 < self.percentile <= 100:
            raise ValidationError(f"percentile must be in (0, 100], got {self.percentile}")

    @property
    def max_score(self) -> float:
        """Largest attainable f, reached at u = P_u and s = 1."""
        return 2.0 ** (1.0 / self.exponent)

    def with_threshold(self, t: float) -> "DecisionConfig":
        return replace(self, threshold=float(t))


@dataclass(frozen=True, eq=False)
class PredictionVector:
    predictions: np.ndarray
    config: Optional[DecisionConfig] = None
    threshold: float = 0.5

    def __len__(self):
        return self.predictions.shape[0]


def normalizer_from_data(u: UncertaintyVector, percentile: float = DEFAULT_PERCENTILE) -> float:
    """Nearest-rank percentile of the uncertainty values, floored at 1e-12."""
    values = np.sort(np.asarray(u.values if isinstance(u, UncertaintyVector) else u, dtype=np.float64))
    if values.size == 0:
        raise EmptyInput("cannot take a percentile of no values")
    if not 0 < percentile <= 100:
        raise ValidationError(f"percentile must be in (0, 100], got {percentile}")
    rank = math.ceil(percentile / 100.0 * values.size) - 1
    value = float(values[min(max(rank, 0), values.size - 1)])
    return value if value > 0 else MIN_NORMALIZER


def config_for(u: UncertaintyVector, exponent: float = DEFAULT_EXPONENT,
               percentile: float = DEFAULT_PERCENTILE, threshold: float = 0.5,
               normalizer: Optional[float] = None) -> DecisionConfig:
    """Build a config whose P_u comes from ``u`` unless ``normalizer`` is fixed."""
    if normalizer is None:
        normalizer = normalizer_from_data(u, percentile)
    return DecisionConfig(threshold, exponent, normalizer, percentile)


def combined_score(u, s, config: DecisionConfig):
    """Evaluate f(u, s); accepts scalars or equal-shape arrays."""
    u_arr = np.asarray(u, dtype=np.float64)
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any(u_arr < 0) or np.any(s_arr < 0):
        raise NegativeInput("f(u, s) needs u >= 0 and s >= 0")
    y = config.exponent
    a = u_arr / config.normalizer
    # factor out the larger term so large exponents cannot overflow
    m = np.maximum(a, s_arr)
    safe = np.where(m > 0, m, 1.0)
    with np.errstate(under="ignore"):
        f = m * ((a / safe) ** y + (s_arr / safe) ** y) ** (1.0 / y)
    f = np.where(m > 0, f, 0.0)
    if f.ndim == 0:
        return float(f)
    return f


def classify_plain(scores: ScoreVector, t: float) -> PredictionVector:
    """Positive iff score > t."""
    pred = np.asarray(scores.scores) > t
    return PredictionVector(pred.astype(np.int8), None, float(t))


def classify_combined(scores: ScoreVector, u: UncertaintyVector, config: DecisionConfig) -> PredictionVector:
    """Positive iff f(u, s) > t; highly uncertain negatives flip to positive."""
    check_aligned(len(scores), len(u))
    f = combined_score(u.values, scores.scores, config)
    pred = f > config.threshold
    return PredictionVector(pred.astype(np.int8), config, config.threshold)


def sweep_thresholds(grid: int, t_max: float) -> np.ndarray:
    if grid < 2:
        raise ValidationError(f"threshold grid needs at least 2 points, got {grid}")
    return np.linspace(0.0, t_max, grid)


def threshold_sweep(scores: ScoreVector, u: Optional[UncertaintyVector] = None,
                    config: Optional[DecisionConfig] = None, grid: int = 1001) -> list:
    """Classify at ``grid`` evenly spaced thresholds.

    Without ``u`` the plain classifier is swept over [0, 1]; with ``u`` the
    combined classifier is swept over [0, 2^(1/y)].
    """
    if u is None:
        ts = sweep_thresholds(grid, 1.0)
        s = np.asarray(scores.scores)
        return [(float(t), PredictionVector((s > t).astype(np.int8), None, float(t))) for t in ts]

    if config is None:
        config = config_for(u)
    check_aligned(len(scores), len(u))
    ts = sweep_thresholds(grid, config.max_score)
    f = combined_score(u.values, scores.scores, config)
    return [
        (float(t), PredictionVector((f > t).astype(np.int8), config.with_threshold(t), float(t)))
        for t in ts
    ]
