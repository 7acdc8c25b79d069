"""Shared validation and feature scaling for the classical classifiers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from dbel.errors import DataError, DimensionError


def check_features(features, width: Optional[int] = None) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"features must be (n, d), got shape {x.shape}")
    if width is not None and x.shape[1] != width:
        raise DimensionError(f"expected {width} feature columns, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise DataError("features contain NaN or infinity")
    return x


def check_training_data(features, labels) -> Tuple[np.ndarray, np.ndarray]:
    x = check_features(features)
    y = np.asarray(labels).reshape(-1)
    if len(y) != len(x):
        raise DimensionError(f"{len(x)} feature rows but {len(y)} labels")
    if np.any((y != 0) & (y != 1)):
        raise DataError("labels must be 0 or 1")
    y = y.astype(np.int64)
    if len(x) < 2 or len(np.unique(y)) < 2:
        raise DataError("both classes must be present in the training data")
    return x, y


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        std = x.std(axis=0)
        return cls(x.mean(axis=0), np.where(std > 0, std, 1.0))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale
