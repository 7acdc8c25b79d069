"""Confusion counts and the accuracy / precision / sensitivity / specificity / F report."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, List

import numpy as np

from dbel.errors import ArgumentError, DataError, DimensionError


@dataclass(frozen=True)
class ConfusionCounts:
    """Class 1 (parasitized) is the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ArgumentError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _binary(labels, name: str) -> np.ndarray:
    a = np.asarray(labels).reshape(-1)
    if np.any((a != 0) & (a != 1)):
        raise DataError(f"{name} must contain only 0 and 1")
    return a.astype(np.int64)


def confusion(true_labels, predicted_labels) -> ConfusionCounts:
    t = _binary(true_labels, "true labels")
    p = _binary(predicted_labels, "predicted labels")
    if t.shape != p.shape:
        raise DimensionError(f"{t.size} true labels but {p.size} predictions")
    return ConfusionCounts(
        tp=int(np.sum((t == 1) & (p == 1))),
        fp=int(np.sum((t == 0) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
        fn=int(np.sum((t == 1) & (p == 0))),
    )


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float  # percent
    precision: float
    sensitivity: float
    specificity: float
    f_score: float
    counts: ConfusionCounts
    degenerate: tuple = ()

    def to_dict(self) -> Dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "f_score": self.f_score,
            "counts": asdict(self.counts),
            "degenerate": list(self.degenerate),
        }


def _ratio(num: int, den: int, name: str, flags: List[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def report(counts: ConfusionCounts) -> MetricsReport:
    """Scores from counts; any 0/0 ratio is reported as 0 and named in ``degenerate``."""
    if counts.total <= 0:
        raise ArgumentError("cannot report on zero samples")
    flags: List[str] = []
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", flags)
    sensitivity = _ratio(counts.tp, counts.tp + counts.fn, "sensitivity", flags)
    specificity = _ratio(counts.tn, counts.tn + counts.fp, "specificity", flags)
    if counts.tp == 0:  # precision + sensitivity == 0
        flags.append("f_score")
        f_score = 0.0
    else:
        # harmonic mean 2 Sen Pre / (Sen + Pre), written over the counts so
        # that only one rounding happens
        f_score = 2 * counts.tp / (2 * counts.tp + counts.fp + counts.fn)
    accuracy = 100.0 * (counts.tp + counts.tn) / counts.total
    return MetricsReport(accuracy, precision, sensitivity, specificity, f_score, counts, tuple(flags))


def evaluate_labels(true_labels, predicted_labels) -> MetricsReport:
    return report(confusion(true_labels, predicted_labels))
