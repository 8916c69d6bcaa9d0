"""Readers and writers for the CSV / NDJSON interchange formats.

Biomarker CSV   ``subject_id,channel,t,value,unit``
Biomarker NDJSON one object per line with the same five keys
Factor CSV      header row; optional leading ``subject_id``; one target column
Accelerometer   ``subject_id,sensor_id,body_location,t,ax,ay,az``

Floats are written with ``repr`` so that a read-back is bit-exact.
"""
from __future__ import annotations

import csv
import json
import sys
from collections import OrderedDict
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .activity import AccelSample
from .errors import InputError
from .model import BiomarkerSample, BiomarkerSeries, validate_series
from .predictor import FactorMatrix

BIOMARKER_FIELDS = ("subject_id", "channel", "t", "value", "unit")
ACCEL_FIELDS = ("subject_id", "sensor_id", "body_location", "t", "ax", "ay", "az")


def fmt(x: float) -> str:
    return repr(float(x))


@contextmanager
def _open_text(path, mode="r"):
    if str(path) == "-":
        yield sys.stdin if "r" in mode else sys.stdout
    else:
        with open(path, mode, newline="", encoding="utf-8") as fh:
            yield fh


def _float(raw, field, where):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise InputError(f"{where}: field {field!r} is not a number: {raw!r}") from None


def _sample(rec: dict, where: str) -> BiomarkerSample:
    missing = [k for k in BIOMARKER_FIELDS if k not in rec or rec[k] is None]
    if missing:
        raise InputError(f"{where}: missing field(s) {', '.join(missing)}")
    try:
        return BiomarkerSample(str(rec["subject_id"]), str(rec["channel"]),
                               _float(rec["t"], "t", where),
                               _float(rec["value"], "value", where), str(rec["unit"]))
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def iter_biomarker_csv(fh: IO[str]) -> Iterator[BiomarkerSample]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or not set(BIOMARKER_FIELDS) <= set(reader.fieldnames):
        raise InputError(f"biomarker CSV header must contain {','.join(BIOMARKER_FIELDS)}")
    for lineno, rec in enumerate(reader, start=2):
        yield _sample(rec, f"line {lineno}")


def iter_biomarker_ndjson(fh: IO[str]) -> Iterator[BiomarkerSample]:
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise InputError(f"line {lineno}: expected a JSON object")
        yield _sample(rec, f"line {lineno}")


def _is_ndjson(path, fmt_hint):
    if fmt_hint:
        return fmt_hint == "ndjson"
    return Path(str(path)).suffix.lower() in (".ndjson", ".jsonl")


def read_biomarker_samples(path, fmt_hint: str | None = None) -> list[BiomarkerSample]:
    with _open_text(path) as fh:
        it = iter_biomarker_ndjson(fh) if _is_ndjson(path, fmt_hint) else iter_biomarker_csv(fh)
        return list(it)


def group_series(samples: Iterable[BiomarkerSample]) -> "OrderedDict[tuple[str, str], BiomarkerSeries]":
    """Split samples into validated series keyed by (subject, channel),
    in order of first appearance."""
    groups: "OrderedDict[tuple[str, str], list]" = OrderedDict()
    for s in samples:
        groups.setdefault((s.subject_id, s.channel), []).append(s)
    return OrderedDict((key, validate_series(v)) for key, v in groups.items())


def write_biomarker_csv(series_list: Iterable[BiomarkerSeries], fh: IO[str]) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BIOMARKER_FIELDS)
    rows = 0
    for series in series_list:
        for s in series:
            w.writerow((s.subject_id, s.channel, fmt(s.t), fmt(s.value), s.unit))
            rows += 1
    return rows


def write_biomarker_ndjson(series_list: Iterable[BiomarkerSeries], fh: IO[str]) -> int:
    rows = 0
    for series in series_list:
        for s in series:
            fh.write(json.dumps({"subject_id": s.subject_id, "channel": s.channel,
                                 "t": s.t, "value": s.value, "unit": s.unit}) + "\n")
            rows += 1
    return rows


def read_factor_csv(path, target: str, subject_column: str = "subject_id") -> FactorMatrix:
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("factor CSV is empty") from None
        if target not in header:
            raise InputError(f"target column {target!r} not in header {header}")
        skip = {header.index(target)}
        if header and header[0] == subject_column:
            skip.add(0)
        factor_idx = [i for i in range(len(header)) if i not in skip]
        if not factor_idx:
            raise InputError("factor CSV has no factor columns")
        rows, y = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise InputError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
            where = f"line {lineno}"
            rows.append([_float(rec[i], header[i], where) for i in factor_idx])
            y.append(_float(rec[header.index(target)], target, where))
    if not rows:
        raise InputError("factor CSV has no data rows")
    return FactorMatrix(tuple(header[i] for i in factor_idx), np.array(rows), np.array(y))


def write_factor_csv(matrix: FactorMatrix, fh: IO[str], target: str = "L") -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("subject_id",) + matrix.factor_names + (target,))
    for i, (row, y) in enumerate(zip(matrix.rows, matrix.target)):
        w.writerow([f"P{i + 1:04d}"] + [fmt(v) for v in row] + [fmt(y)])
    return matrix.m


def read_accel_csv(path) -> list[AccelSample]:
    with _open_text(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(ACCEL_FIELDS) <= set(reader.fieldnames):
            raise InputError(f"accelerometer CSV header must contain {','.join(ACCEL_FIELDS)}")
        out = []
        for lineno, rec in enumerate(reader, start=2):
            where = f"line {lineno}"
            try:
                out.append(AccelSample(
                    rec["subject_id"], rec["sensor_id"], rec["body_location"],
                    *(_float(rec[k], k, where) for k in ("t", "ax", "ay", "az"))))
            except InputError as exc:
                raise InputError(f"{where}: {exc}") from None
    return out


def write_accel_csv(stream: Iterable[AccelSample], fh: IO[str]) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ACCEL_FIELDS)
    rows = 0
    for s in stream:
        w.writerow((s.subject_id, s.sensor_id, s.body_location,
                    fmt(s.t), fmt(s.ax), fmt(s.ay), fmt(s.az)))
        rows += 1
    return rows
