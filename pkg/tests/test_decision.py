import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predunc.core import EmptyInput, LengthMismatch, NegativeInput, ScoreVector, UncertaintyVector, ValidationError
from predunc.decision import (
    DecisionConfig,
    MIN_NORMALIZER,
    classify_combined,
    classify_plain,
    combined_score,
    normalizer_from_data,
    threshold_sweep,
)

import oracles


def U(values):
    return UncertaintyVector(values, "test")


def test_normalizer_nearest_rank():
    values = [k / 10 for k in range(1, 11)]
    assert normalizer_from_data(U(values), 99) == oracles.nearest_rank(values, 99) == 1.0
    assert normalizer_from_data(U(values), 50) == oracles.nearest_rank(values, 50) == 0.5


def test_normalizer_zero_substitute():
    assert normalizer_from_data(U([0.0, 0.0, 0.0]), 99) == MIN_NORMALIZER


@pytest.mark.parametrize("pct", [0.5, 50, 99, 100])
def test_normalizer_single(pct):
    assert normalizer_from_data(U([0.4]), pct) == 0.4


def test_normalizer_errors():
    with pytest.raises(EmptyInput):
        normalizer_from_data(U([]), 99)
    with pytest.raises(ValidationError):
        normalizer_from_data(U([0.1]), 0)


def test_normalizer_matches_oracle_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        v = rng.random(rng.integers(1, 60)).tolist()
        pct = float(rng.uniform(0.1, 100))
        assert normalizer_from_data(U(v), pct) == oracles.nearest_rank(v, pct)


def test_config_validation():
    with pytest.raises(ValidationError):
        DecisionConfig(threshold=-0.1)
    with pytest.raises(ValidationError):
        DecisionConfig(exponent=0.5)
    with pytest.raises(ValidationError):
        DecisionConfig(normalizer=0)


@pytest.mark.parametrize("y", [1, 2, 10, 200])
def test_combined_axis_intersections(y):
    cfg = DecisionConfig(exponent=y, normalizer=0.8)
    assert combined_score(0.0, 0.7, cfg) == 0.7
    assert combined_score(0.8, 0.0, cfg) == 1.0


def test_combined_hand_value():
    cfg = DecisionConfig(exponent=10, normalizer=0.8)
    assert combined_score(0.8, 1.0, cfg) == pytest.approx(2 ** 0.1, rel=1e-15)
    assert combined_score(0.8, 0.4, cfg) == pytest.approx((1 + 0.4 ** 10) ** 0.1, rel=1e-15)


def test_combined_negative_input():
    with pytest.raises(NegativeInput):
        combined_score(-0.1, 0.5, DecisionConfig())


def test_classify_plain_strict():
    assert classify_plain(ScoreVector([0.5]), 0.5).predictions.tolist() == [0]
    assert classify_plain(ScoreVector([0.51]), 0.5).predictions.tolist() == [1]
    assert classify_plain(ScoreVector([0.2, 0.8]), 0.5).predictions.tolist() == [0, 1]


def test_classify_combined_examples():
    s = ScoreVector([0.4, 0.95, 0.2])
    u = U([0.8, 0.0, 0.0])
    cfg = DecisionConfig(threshold=0.9, exponent=10, normalizer=0.8)
    # the uncertain negative at s=0.4 flips to positive
    assert classify_combined(s, u, cfg).predictions.tolist() == [1, 1, 0]


def test_classify_combined_length_mismatch():
    with pytest.raises(LengthMismatch):
        classify_combined(ScoreVector([0.1, 0.2]), U([0.1]), DecisionConfig())


def test_sweep_plain_grid():
    sweep = threshold_sweep(ScoreVector([0.2, 0.7]), grid=3)
    assert [t for t, _ in sweep] == [0.0, 0.5, 1.0]


def test_sweep_combined_grid():
    cfg = DecisionConfig(exponent=10, normalizer=1.0)
    sweep = threshold_sweep(ScoreVector([0.2]), U([0.3]), cfg, grid=2)
    assert [t for t, _ in sweep] == [0.0, 2 ** 0.1]


def test_sweep_grid_too_small():
    with pytest.raises(ValidationError):
        threshold_sweep(ScoreVector([0.2]), grid=1)


def test_zero_uncertainty_reduces_to_plain():
    rng = np.random.default_rng(2)
    s = ScoreVector(np.r_[rng.random(500), np.linspace(0, 1, 101)])
    u = U(np.zeros(len(s)))
    for t in np.linspace(0, 1, 101):
        cfg = DecisionConfig(threshold=t, exponent=10, normalizer=0.37)
        assert np.array_equal(classify_combined(s, u, cfg).predictions, classify_plain(s, t).predictions)


@pytest.mark.parametrize("y", [2, 10, 200])
def test_monotone_on_grid(y):
    cfg = DecisionConfig(exponent=y, normalizer=0.9)
    uu, ss = np.meshgrid(np.linspace(0, 0.9, 101), np.linspace(0, 1, 101), indexing="ij")
    f = combined_score(uu, ss, cfg)
    assert np.all(np.diff(f, axis=0) >= 0)
    assert np.all(np.diff(f, axis=1) >= 0)


def test_large_exponent_approaches_max():
    cfg = DecisionConfig(exponent=200, normalizer=0.9)
    uu, ss = np.meshgrid(np.linspace(0, 0.9, 101), np.linspace(0, 1, 101), indexing="ij")
    f = combined_score(uu, ss, cfg)
    assert np.max(np.abs(f - np.maximum(uu / 0.9, ss))) <= 0.01


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 2), st.floats(0, 2)), min_size=1, max_size=30),
       st.floats(0, 1.1), st.sampled_from([1.0, 2.0, 10.0, 50.0]))
def test_raising_uncertainty_only_adds_positives(rows, t, y):
    s = ScoreVector([r[0] for r in rows])
    lo = np.array([min(r[1], r[2]) for r in rows])
    hi = np.array([max(r[1], r[2]) for r in rows])
    cfg = DecisionConfig(threshold=t, exponent=y, normalizer=1.3)
    p_lo = classify_combined(s, U(lo), cfg).predictions
    p_hi = classify_combined(s, U(hi), cfg).predictions
    assert np.all(p_hi >= p_lo)


def test_positive_sets_nested_in_threshold():
    rng = np.random.default_rng(9)
    s = ScoreVector(rng.random(300))
    u = U(rng.random(300))
    for sweep in (threshold_sweep(s, grid=201), threshold_sweep(s, u, DecisionConfig(normalizer=0.99), 201)):
        preds = np.array([p.predictions for _, p in sweep])
        assert np.all(np.diff(preds, axis=0) <= 0)
