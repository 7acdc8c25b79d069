"""ROC and precision-recall curves with trapezoidal AUC."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dbel.errors import DataError, DimensionError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class CurveData:
    kind: str  # "roc" (x = FPR, y = TPR) or "pr" (x = recall, y = precision)
    x: np.ndarray
    y: np.ndarray
    thresholds: np.ndarray
    auc: float


def _sweep(scores, labels):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    t = np.asarray(labels).reshape(-1)
    if s.shape != t.shape:
        raise DimensionError(f"{s.size} scores but {t.size} labels")
    if np.any((t != 0) & (t != 1)):
        raise DataError("labels must be 0 or 1")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order].astype(np.int64)
    # group tied scores: one curve point per distinct threshold
    last = np.r_[np.nonzero(s[1:] != s[:-1])[0], s.size - 1]
    tp = np.cumsum(t)[last]
    fp = np.cumsum(1 - t)[last]
    return s[last], tp, fp, int(t.sum()), int((1 - t).sum())


def roc_curve(scores, labels) -> CurveData:
    thr, tp, fp, pos, neg = _sweep(scores, labels)
    if pos == 0 or neg == 0:
        raise DataError("ROC needs both classes")
    x = np.r_[0.0, fp / neg]
    y = np.r_[0.0, tp / pos]
    return CurveData("roc", x, y, np.r_[np.inf, thr], float(_trapezoid(y, x)))


def pr_curve(scores, labels) -> CurveData:
    """Points at every distinct threshold, plus a recall-0 anchor carrying the first precision."""
    thr, tp, fp, pos, _ = _sweep(scores, labels)
    if pos == 0:
        raise DataError("PR curve needs at least one positive")
    recall = tp / pos
    precision = tp / (tp + fp)
    x = np.r_[0.0, recall]
    y = np.r_[precision[0], precision]
    return CurveData("pr", x, y, np.r_[np.inf, thr], float(_trapezoid(y, x)))
