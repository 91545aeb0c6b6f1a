"""Reading and writing prediction CSV files.

Format: UTF-8 CSV with header ``input_id,sample_idx,label,p0,p1[,p2...]``,
one row per (input, sample). Floats are written with 17 significant digits
so doubles survive a round trip unchanged.
"""
from __future__ import annotations

import csv
import io
from typing import Optional, TextIO

import numpy as np

from .core import LabelVector, PreduncError, SampleSet, ValidationError, validate_sample_set

FLOAT_FMT = "%.17g"


class ParseError(PreduncError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def fmt_float(x: float) -> str:
    return FLOAT_FMT % x


def write_predictions(fh: TextIO, samples: SampleSet, labels: LabelVector) -> None:
    c = samples.n_classes
    lines = [",".join(["input_id", "sample_idx", "label"] + [f"p{k}" for k in range(c)])]
    probs = samples.probs
    for i, input_id in enumerate(samples.input_ids):
        lab = str(int(labels.labels[i]))
        for t in range(samples.n_samples):
            row = [str(input_id), str(t), lab]
            row.extend(FLOAT_FMT % v for v in probs[i, t])
            lines.append(",".join(row))
    fh.write("\n".join(lines) + "\n")


def dumps_predictions(samples: SampleSet, labels: LabelVector) -> str:
    buf = io.StringIO()
    write_predictions(buf, samples, labels)
    return buf.getvalue()


def read_predictions(fh: TextIO):
    """Parse a prediction file into ``(SampleSet, LabelVector)``.

    Inputs keep the order in which their ids first appear. Row-level
    problems raise :class:`ParseError` naming the line; structural problems
    (ragged T, inconsistent labels, bad probabilities) raise validation
    errors.
    """
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", 1) from None
    header = [h.strip() for h in header]
    if header[:3] != ["input_id", "sample_idx", "label"] or len(header) < 5:
        raise ParseError("header must be input_id,sample_idx,label,p0,p1[,...]", 1)
    c = len(header) - 3
    if header[3:] != [f"p{k}" for k in range(c)]:
        raise ParseError("probability columns must be p0, p1, ... in order", 1)

    groups: dict = {}
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != c + 3:
            raise ParseError(f"expected {c + 3} fields, got {len(row)}", line)
        input_id = row[0]
        if not input_id:
            raise ParseError("empty input_id", line)
        try:
            t = int(row[1])
            label = int(row[2])
            probs = [float(v) for v in row[3:]]
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        if label not in (0, 1):
            raise ParseError(f"label must be 0 or 1, got {label}", line)
        g = groups.setdefault(input_id, {"label": label, "rows": {}, "line": line})
        if g["label"] != label:
            raise ValidationError(f"input {input_id!r}: label changes at line {line}")
        if t in g["rows"]:
            raise ValidationError(f"input {input_id!r}: duplicate sample_idx {t} at line {line}")
        g["rows"][t] = probs

    if not groups:
        raise ParseError("no data rows", 2)
    ids = list(groups)
    t_counts = {len(g["rows"]) for g in groups.values()}
    if len(t_counts) != 1:
        raise ValidationError(f"inputs have differing sample counts: {sorted(t_counts)}")
    n_samples = t_counts.pop()
    arr = np.empty((len(ids), n_samples, c))
    labels = np.empty(len(ids), dtype=np.int8)
    for i, input_id in enumerate(ids):
        g = groups[input_id]
        if sorted(g["rows"]) != list(range(n_samples)):
            raise ValidationError(f"input {input_id!r}: sample_idx must cover 0..{n_samples - 1}")
        for t in range(n_samples):
            arr[i, t] = g["rows"][t]
        labels[i] = g["label"]
    return validate_sample_set(arr, ids), LabelVector(labels)


def load_predictions(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return read_predictions(fh)
