"""Deterministic CSV / JSON writers and the feature-matrix CSV reader."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

from dbel.cli.persist import dumps_json
from dbel.errors import DataError


def fmt(value) -> str:
    """Shortest round-trip text; 32-bit floats use 9 significant digits."""
    if isinstance(value, (np.floating, float)):
        if isinstance(value, np.float32):
            return format(float(value), ".9g")
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows), newline="")


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj))


def feature_header(width: int) -> list:
    return [f"f{k}" for k in range(width)] + ["label"]


def write_features(path, features: np.ndarray, labels: np.ndarray) -> None:
    feats = np.asarray(features, dtype=np.float32)
    rows = (list(f) + [int(y)] for f, y in zip(feats, labels))
    write_csv(path, feature_header(feats.shape[1]), rows)


def read_features(path) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of write_features; values are exact 32-bit round trips."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read feature file {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][-1:] != ["label"] or rows[0][:-1] != feature_header(len(rows[0]) - 1)[:-1]:
        raise DataError(f"{path}: header must be f0..f(d-1),label")
    width = len(rows[0]) - 1
    body = rows[1:]
    if any(len(r) != width + 1 for r in body):
        raise DataError(f"{path}: ragged feature rows")
    try:
        feats = np.array([[float(v) for v in r[:-1]] for r in body], dtype=np.float32).reshape(-1, width)
        labels = np.array([int(r[-1]) for r in body], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from exc
    return feats, labels
