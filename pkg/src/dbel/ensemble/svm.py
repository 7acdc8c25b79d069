"""Linear SVM trained in the primal with Pegasos stochastic sub-gradient steps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dbel.ensemble.common import Standardizer, check_features, check_training_data


@dataclass
class LinearSvm:
    weights: np.ndarray
    bias: float
    lam: float
    scaler: Standardizer

    def decision(self, features: np.ndarray) -> np.ndarray:
        x = self.scaler.transform(check_features(features, len(self.weights)))
        return x @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.decision(features) > 0).astype(np.int64)


def hinge_loss(w: np.ndarray, b: float, x: np.ndarray, y_pm: np.ndarray) -> float:
    return float(np.mean(np.maximum(0.0, 1.0 - y_pm * (x @ w + b))))


def objective(w: np.ndarray, b: float, x: np.ndarray, y_pm: np.ndarray, lam: float) -> float:
    """lam/2 (|w|^2 + b^2) + mean hinge loss, on standardized features."""
    return 0.5 * lam * (float(w @ w) + b * b) + hinge_loss(w, b, x, y_pm)


def train_svm(features, labels, lam: float = 1e-4, epochs: int = 20, seed: int = 0) -> LinearSvm:
    """Pegasos with step ``1 / (lam t)`` and projection onto the ``1/sqrt(lam)`` ball.

    The bias is carried as a constant feature, so it is regularized with
    the weights. Labels {0, 1} are mapped to {-1, +1}.
    """
    x, y = check_training_data(features, labels)
    scaler = Standardizer.fit(x)
    xs = np.hstack([scaler.transform(x), np.ones((len(x), 1))])
    y_pm = np.where(y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    w = np.zeros(xs.shape[1])
    radius = 1.0 / np.sqrt(lam)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(len(xs)):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y_pm[i] * (xs[i] @ w)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y_pm[i] * xs[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
    return LinearSvm(weights=w[:-1].copy(), bias=float(w[-1]), lam=lam, scaler=scaler)
