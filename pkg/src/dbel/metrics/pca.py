"""Principal-component projection for feature-space visualization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from dbel.errors import ArgumentError, DimensionError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class PcaProjection:
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,) absolute variances
    explained_fraction: np.ndarray  # (k,) fraction of total variance, non-increasing
    coordinates: np.ndarray  # (n, k)
    mean: np.ndarray
    labels: Optional[np.ndarray] = None
    reduced_rank: bool = False

    def project(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        return (x - self.mean) @ self.components.T


def pca(features, k: int = 3, labels=None) -> PcaProjection:
    """Top-``k`` components of the sample covariance via a full symmetric eigendecomposition.

    Each direction is signed so that its largest-magnitude entry is positive.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"features must be (n, d), got shape {x.shape}")
    n, d = x.shape
    if k < 1 or k > d:
        raise ArgumentError(f"k must be in [1, {d}], got {k}")
    if n < max(4, k + 1):
        raise DimensionError(f"need at least {max(4, k + 1)} samples, got {n}")
    if labels is not None:
        labels = np.asarray(labels).reshape(-1)
        if labels.shape[0] != n:
            raise DimensionError(f"{n} rows but {labels.shape[0]} labels")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (n - 1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values)[::-1]
    values = np.clip(values[order], 0.0, None)
    vectors = vectors[:, order].T
    total = float(values.sum())
    scale = max(total, np.finfo(np.float64).tiny)
    reduced = bool(np.sum(values > RANK_TOL * max(values[0], 1.0)) < k)
    comps = vectors[:k].copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    var = values[:k].copy()
    var[var <= RANK_TOL * max(values[0], 1.0)] = 0.0
    frac = var / scale if total > 0 else np.zeros(k)
    return PcaProjection(comps, var, frac, xc @ comps.T, mean, labels, reduced)


def pca_top3(features, labels=None) -> PcaProjection:
    return pca(features, 3, labels)
