"""Evaluation metrics, ROC / PR curves and PCA projections."""
from dbel.metrics.classification import (
    ConfusionCounts,
    MetricsReport,
    confusion,
    evaluate_labels,
    report,
)
from dbel.metrics.curves import CurveData, pr_curve, roc_curve
from dbel.metrics.pca import PcaProjection, pca, pca_top3

__all__ = [
    "ConfusionCounts", "MetricsReport", "confusion", "evaluate_labels", "report",
    "CurveData", "pr_curve", "roc_curve", "PcaProjection", "pca", "pca_top3",
]
