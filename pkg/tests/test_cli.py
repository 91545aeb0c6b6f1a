import io
import json

import numpy as np
import pytest

from predunc import cli
from predunc.core import LabelVector, RowSumViolation, ValidationError, validate_sample_set
from predunc.io import ParseError, dumps_predictions, load_predictions, read_predictions
from predunc.sim import generate, preset

SMALL = """input_id,sample_idx,label,p0,p1
a,0,1,0.2,0.8
a,1,1,0.4,0.6
b,1,0,0.7,0.3
b,0,0,0.9,0.1
"""


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "small.csv"
    path.write_text(SMALL)
    return path


@pytest.fixture(scope="module")
def sim_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("sim") / "sim.csv"
    assert cli.main(["simulate", "--preset", "in-domain", "--seed", "42", "--n-inputs", "400", "--out", str(path)]) == 0
    return path


def test_read_small(small_file):
    samples, labels = load_predictions(small_file)
    assert samples.input_ids == ("a", "b")
    assert samples.probs[1, :, 1].tolist() == [0.1, 0.3]
    assert labels.labels.tolist() == [1, 0]


@pytest.mark.parametrize("text, line", [
    ("input_id,sample_idx,label,p0,p1\na,0,1,0.2\n", 2),
    ("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.8\na,x,1,0.2,0.8\n", 3),
    ("input_id,sample_idx,label,p0,p1\na,0,2,0.2,0.8\n", 2),
    ("id,sample,label,p0,p1\n", 1),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(ParseError) as info:
        read_predictions(io.StringIO(text))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("text, exc", [
    ("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.8\na,1,1,0.2,0.8\nb,0,1,0.5,0.5\n", ValidationError),
    ("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.8\na,1,0,0.2,0.8\n", ValidationError),
    ("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.7\n", RowSumViolation),
    ("input_id,sample_idx,label,p0,p1\na,1,1,0.2,0.8\n", ValidationError),
])
def test_structural_errors(text, exc):
    with pytest.raises(exc):
        read_predictions(io.StringIO(text))


def test_round_trip_exact():
    samples, labels, _ = generate(preset("center-shift", n_inputs=300, seed=4))
    back, back_labels = read_predictions(io.StringIO(dumps_predictions(samples, labels)))
    assert back == samples
    assert np.array_equal(back.probs, samples.probs)
    assert np.array_equal(back_labels.labels, labels.labels)


def test_round_trip_multiclass():
    rng = np.random.default_rng(0)
    p = rng.dirichlet(np.ones(3), size=(5, 4))
    s = validate_sample_set(p, [f"i{k}" for k in range(5)])
    back, _ = read_predictions(io.StringIO(dumps_predictions(s, LabelVector(np.zeros(5)))))
    assert back == s


def test_metrics_command(small_file, tmp_path, capsys):
    out = tmp_path / "u.csv"
    assert cli.main(["metrics", str(small_file), "--metric", "sample-mean", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "input_id,uncertainty"
    assert [r.split(",")[0] for r in rows[1:]] == ["a", "b"]
    assert float(rows[1].split(",")[1]) == pytest.approx(1 - 2 * 0.2 ** 2)


def test_metrics_rows_sorted(tmp_path):
    src = tmp_path / "rev.csv"
    src.write_text("input_id,sample_idx,label,p0,p1\nz,0,1,0.2,0.8\nm,0,0,0.5,0.5\n")
    out = tmp_path / "u.csv"
    assert cli.main(["metrics", str(src), "--metric", "baseline", "--out", str(out)]) == 0
    assert [r.split(",")[0] for r in out.read_text().splitlines()[1:]] == ["m", "z"]


def test_exit_codes(tmp_path, small_file):
    bad = tmp_path / "bad.csv"
    bad.write_text("input_id,sample_idx,label,p0,p1\na,0,1,0.2\n")
    assert cli.main(["metrics", str(bad), "--metric", "entropy"]) == cli.EXIT_PARSE

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.8\na,1,1,0.2,0.8\nb,0,0,0.5,0.5\n")
    assert cli.main(["metrics", str(ragged), "--metric", "entropy"]) == cli.EXIT_VALIDATION

    single = tmp_path / "single.csv"
    single.write_text("input_id,sample_idx,label,p0,p1\na,0,1,0.2,0.8\nb,0,1,0.5,0.5\n")
    assert cli.main(["evaluate", str(single)]) == cli.EXIT_EVALUATION

    assert cli.main(["metrics", str(tmp_path / "missing.csv"), "--metric", "entropy"]) == cli.EXIT_IO
    assert cli.main(["simulate", "--out", str(tmp_path / "no" / "such" / "dir.csv"), "--n-inputs", "5"]) == cli.EXIT_IO

    with pytest.raises(SystemExit) as info:
        cli.main(["curves", str(small_file), "--kind", "banana"])
    assert info.value.code == cli.EXIT_USAGE


def test_simulate_rows_and_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["simulate", "--preset", "in-domain", "--seed", "42", "--n-inputs", "50", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 50 * 5
    assert cli.main(["metrics", str(a), "--metric", "mutual-information", "--out", str(tmp_path / "m.csv")]) == 0


def test_simulate_explicit_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_inputs": 20, "t_samples": 3, "mu_pos": 2.0, "mu_neg": -2.0}))
    out = tmp_path / "o.csv"
    assert cli.main(["simulate", "--config", str(cfg), "--seed", "1", "--out", str(out)]) == 0
    samples, _ = load_predictions(out)
    assert (samples.n_inputs, samples.n_samples) == (20, 3)
    cfg.write_text(json.dumps({"n_inputs": 20, "pi": 2.0}))
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(out)]) == cli.EXIT_VALIDATION


def test_evaluate_report(sim_file, tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["evaluate", str(sim_file), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    cls = report["classification"]
    assert set(cls) == {"baseline", "mean-softmax", "sample-mean", "sample-variance", "entropy",
                        "mutual-information"}
    for entry in cls.values():
        assert 0 <= entry["roc_auc"] <= 1 and 0 <= entry["pr_auc"] <= 1
        assert set(entry["accuracy_curve"]) == {"max_accuracy", "argmax_threshold", "plateau_width"}
    table = report["misprediction"]["roc_auc"]
    assert set(table) == {"baseline", "sample-mean", "sample-variance", "entropy", "mutual-information"}
    for row in table.values():
        assert list(row) == ["0.1", "0.5", "0.9"]
        assert all(0 <= v <= 1 for v in row.values())
    assert report["version"] == cli.__version__


def test_evaluate_baseline_only(sim_file, tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["evaluate", str(sim_file), "--metric", "none", "--thresholds", "0.3", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report["classification"]) == {"baseline", "mean-softmax"}
    assert list(report["misprediction"]["roc_auc"]) == ["baseline"]
    assert list(report["misprediction"]["roc_auc"]["baseline"]) == ["0.3"]


def test_evaluate_fixed_normalizer(sim_file, tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["evaluate", str(sim_file), "--metric", "entropy", "--normalizer", "0.5", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["classification"]["entropy"]["normalizer"] == 0.5


def test_curves_roc_through_corner(tmp_path):
    src = tmp_path / "sep.csv"
    src.write_text("input_id,sample_idx,label,p0,p1\na,0,1,0.1,0.9\nb,0,1,0.2,0.8\nc,0,0,0.7,0.3\nd,0,0,0.9,0.1\n")
    out = tmp_path / "roc.csv"
    assert cli.main(["curves", str(src), "--kind", "roc", "--out", str(out)]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert any(float(x) == 0.0 and float(y) == 1.0 for _, _, x, y in rows)


def test_curves_accuracy_both(sim_file, tmp_path):
    out = tmp_path / "acc.csv"
    assert cli.main(["curves", str(sim_file), "--kind", "accuracy", "--metric", "sample-mean", "--grid", "11",
                     "--out", str(out)]) == 0
    names = [r.split(",")[0] for r in out.read_text().splitlines()[1:]]
    assert names.count("plain") == 11 and names.count("combined") == 11
