"""Predictive-uncertainty metrics, score/uncertainty decision rules and their evaluation."""

__version__ = "0.1.0"

from .core import (
    EvalCurve,
    LabelVector,
    SampleSet,
    ScoreVector,
    UncertaintyVector,
    positive_scores,
    validate_sample_set,
)
from .decision import DecisionConfig, classify_combined, classify_plain, combined_score, threshold_sweep
from .metrics import (
    MetricKind,
    baseline_uncertainty,
    mean_softmax,
    mutual_information,
    predictive_entropy,
    sample_mean_uncertainty,
    sample_variance,
)
from .sim import RegimeConfig, generate, preset
