"""Command-line front end: ``predunc {simulate,metrics,evaluate,curves}``.

Exit codes
----------
0  success
2  usage error (bad flags)
3  parse error in an input file
4  validation error (data or config violates an invariant)
5  evaluation error (a metric is undefined, e.g. single-class labels)
6  I/O error
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from . import decision, evaluation, metrics
from .core import EvaluationError, PreduncError, ValidationError, positive_scores
from .io import ParseError, dumps_predictions, fmt_float, load_predictions
from .metrics import SAMPLE_METRICS, MetricKind
from .sim import InvalidConfig, RegimeConfig, UnknownPreset, generate, preset, preset_names

log = logging.getLogger("predunc")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_EVALUATION = 5
EXIT_IO = 6

DEFAULT_THRESHOLDS = (0.1, 0.5, 0.9)
METRIC_CHOICES = [k.value for k in MetricKind]


class CliIOError(PreduncError):
    pass


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliIOError(f"cannot write {path}: {exc.strerror or exc}") from None


def _load(path):
    try:
        return load_predictions(path)
    except OSError as exc:
        raise CliIOError(f"cannot read {path}: {exc.strerror or exc}") from None


def _thresholds(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None
    if not values or any(not 0 <= v <= 1 for v in values):
        raise argparse.ArgumentTypeError("thresholds must be in [0, 1]")
    return values


def _requested_metrics(args, n_samples: int) -> list:
    """Sample metrics to run; ``none`` means baseline only."""
    if not args.metric:
        kinds = [k for k in SAMPLE_METRICS if not (k is MetricKind.SAMPLE_VARIANCE and n_samples < 2)]
        return kinds
    if "none" in args.metric:
        return []
    kinds = []
    for name in args.metric:
        kind = MetricKind(name)
        if kind is not MetricKind.BASELINE and kind not in kinds:
            kinds.append(kind)
    return kinds


def cmd_simulate(args) -> int:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                params = json.load(fh)
        except OSError as exc:
            raise CliIOError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        try:
            config = RegimeConfig(**params)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None
        if args.profile:
            config = config.with_profile(args.profile)
    else:
        config = preset(args.preset, profile=args.profile)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.n_inputs is not None:
        config = replace(config, n_inputs=args.n_inputs)
    samples, labels, _ = generate(config)
    _write_text(args.out, dumps_predictions(samples, labels))
    return EXIT_OK


def cmd_metrics(args) -> int:
    samples, labels = _load(args.input)
    kind = MetricKind(args.metric)
    scores = positive_scores(samples, 0) if kind is MetricKind.BASELINE else None
    u = metrics.compute(kind, samples=samples, scores=scores)
    order = sorted(range(samples.n_inputs), key=lambda i: str(samples.input_ids[i]))
    lines = ["input_id,uncertainty"]
    lines.extend(f"{samples.input_ids[i]},{fmt_float(u.values[i])}" for i in order)
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _classification_entry(ranking, sweep, labels) -> dict:
    curve = evaluation.accuracy_curve(sweep, labels)
    return {
        "roc_auc": evaluation.roc_auc(ranking, labels),
        "pr_auc": evaluation.pr_auc(ranking, labels),
        "accuracy_curve": curve.summary(),
    }


def build_report(samples, labels, kinds, exponent=decision.DEFAULT_EXPONENT,
                 percentile=decision.DEFAULT_PERCENTILE, grid=1001,
                 thresholds=DEFAULT_THRESHOLDS, normalizer=None, source=None) -> dict:
    """Evaluation report as a plain dict (see ``cmd_evaluate``)."""
    y = labels.labels
    if y.min() == y.max():
        raise evaluation.SingleClass("evaluation needs both positive and negative labels")
    s = positive_scores(samples, 0)

    classification = {
        "baseline": _classification_entry(s.scores, decision.threshold_sweep(s, grid=grid), labels),
    }
    if samples.n_classes == 2 and samples.n_samples > 1:
        s_bar = metrics.mean_softmax(samples)
        classification["mean-softmax"] = _classification_entry(
            s_bar.scores, decision.threshold_sweep(s_bar, grid=grid), labels)

    detectors = {"baseline": metrics.baseline_uncertainty(s)}
    for kind in kinds:
        u = metrics.compute(kind, samples=samples)
        detectors[kind.value] = u
        cfg = decision.config_for(u, exponent, percentile, normalizer=normalizer)
        f = decision.combined_score(u.values, s.scores, cfg)
        entry = _classification_entry(f, decision.threshold_sweep(s, u, cfg, grid), labels)
        entry["normalizer"] = cfg.normalizer
        classification[kind.value] = entry

    misprediction = {}
    accuracy_at = {}
    for name, det in detectors.items():
        row = {}
        for t in thresholds:
            key = repr(float(t))
            try:
                task, auc = evaluation.misprediction_detection(s, labels, det, t)
            except evaluation.DegenerateMispredictions:
                row[key] = None
                continue
            row[key] = auc
            accuracy_at[key] = task.accuracy
        misprediction[name] = row
    for t in thresholds:
        key = repr(float(t))
        if key not in accuracy_at:
            pred = decision.classify_plain(s, t)
            accuracy_at[key] = evaluation.accuracy(evaluation.confusion(pred, labels))

    return {
        "tool": "predunc",
        "version": __version__,
        "config": {
            "input": source,
            "metrics": [k.value for k in kinds],
            "exponent_y": exponent,
            "percentile": percentile,
            "grid": grid,
            "thresholds": list(thresholds),
            "normalizer": normalizer,
        },
        "data": {
            "n_inputs": samples.n_inputs,
            "n_samples": samples.n_samples,
            "n_classes": samples.n_classes,
            "n_positive": int(np.count_nonzero(y)),
        },
        "classification": classification,
        "misprediction": {"roc_auc": misprediction, "classification_accuracy": accuracy_at},
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def cmd_evaluate(args) -> int:
    samples, labels = _load(args.input)
    kinds = _requested_metrics(args, samples.n_samples)
    report = build_report(samples, labels, kinds, args.exponent_y, args.percentile, args.grid,
                          args.thresholds, args.normalizer, source=os.path.basename(args.input))
    _write_text(args.out, dumps_report(report))
    return EXIT_OK


def curve_rows(samples, labels, kind: str, metric=None, exponent=decision.DEFAULT_EXPONENT,
               percentile=decision.DEFAULT_PERCENTILE, grid=1001, normalizer=None) -> list:
    """(curve name, threshold, x, y) rows for plotting."""
    s = positive_scores(samples, 0)
    u = cfg = None
    if metric is not None:
        u = metrics.compute(metric, samples=samples, scores=s)
        cfg = decision.config_for(u, exponent, percentile, normalizer=normalizer)

    curves = []
    if kind == "accuracy":
        curves.append(("plain", evaluation.accuracy_curve(decision.threshold_sweep(s, grid=grid), labels)))
        if u is not None:
            sweep = decision.threshold_sweep(s, u, cfg, grid)
            curves.append(("combined", evaluation.accuracy_curve(sweep, labels)))
    else:
        fn = evaluation.roc_curve if kind == "roc" else evaluation.pr_curve
        curves.append(("plain", fn(s.scores, labels)))
        if u is not None:
            curves.append(("combined", fn(decision.combined_score(u.values, s.scores, cfg), labels)))

    rows = []
    for name, curve in curves:
        rows.extend((name, t, x, y) for t, x, y in curve.points)
    return rows


def cmd_curves(args) -> int:
    samples, labels = _load(args.input)
    rows = curve_rows(samples, labels, args.kind, args.metric, args.exponent_y, args.percentile,
                      args.grid, args.normalizer)
    lines = ["curve,threshold,x,y"]
    lines.extend(f"{n},{fmt_float(t)},{fmt_float(x)},{fmt_float(y)}" for n, t, x, y in rows)
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _add_decision_flags(p):
    p.add_argument("--exponent-y", type=float, default=decision.DEFAULT_EXPONENT,
                   help="shape exponent y of the 2D boundary (default 10)")
    p.add_argument("--percentile", type=float, default=decision.DEFAULT_PERCENTILE,
                   help="percentile of uncertainties used as P_u (default 99)")
    p.add_argument("--normalizer", type=float, default=None,
                   help="fixed P_u instead of deriving it from the data")
    p.add_argument("--grid", type=int, default=1001, help="threshold sweep points (default 1001)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="predunc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated prediction file")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", default="in-domain", choices=preset_names())
    src.add_argument("--config", help="JSON file with explicit regime parameters")
    p.add_argument("--profile", choices=["ensemble", "dropout", "tta"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-inputs", type=int, default=None)
    p.add_argument("--out", "-o", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="per-input uncertainty values")
    p.add_argument("input")
    p.add_argument("--metric", required=True, choices=METRIC_CHOICES)
    p.add_argument("--out", "-o", default="-")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("evaluate", help="JSON report of classification and misprediction detection")
    p.add_argument("input")
    p.add_argument("--metric", action="append", choices=METRIC_CHOICES + ["none"],
                   help="repeatable; default all sample metrics, 'none' for baseline only")
    _add_decision_flags(p)
    p.add_argument("--thresholds", type=_thresholds, default=DEFAULT_THRESHOLDS,
                   help="comma-separated misprediction thresholds (default 0.1,0.5,0.9)")
    p.add_argument("--out", "-o", default="-")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("curves", help="ROC, PR or accuracy curve points as CSV")
    p.add_argument("input")
    p.add_argument("--kind", required=True, choices=["roc", "pr", "accuracy"])
    p.add_argument("--metric", default=None, choices=METRIC_CHOICES,
                   help="combine this uncertainty with the score")
    _add_decision_flags(p)
    p.add_argument("--out", "-o", default="-")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "grid", 2) < 2:
        parser.error("--grid must be at least 2")
    try:
        return args.func(args)
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except CliIOError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (ValidationError, InvalidConfig, UnknownPreset) as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION
    except EvaluationError as exc:
        log.error("evaluation error: %s", exc)
        return EXIT_EVALUATION
    except BrokenPipeError:
        # downstream reader closed early, e.g. `| head`
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
