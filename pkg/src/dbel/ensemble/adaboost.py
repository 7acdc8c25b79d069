"""AdaBoost.M1 over axis-aligned decision stumps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from dbel.ensemble.common import check_features, check_training_data

EPS_CLAMP = 1e-10


@dataclass(frozen=True)
class Stump:
    """Predicts ``polarity`` where ``x[feature] > threshold`` and ``-polarity`` elsewhere."""

    feature: int
    threshold: float
    polarity: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.where(x[:, self.feature] > self.threshold, self.polarity, -self.polarity)


@dataclass
class AdaBoostModel:
    stumps: List[Stump]
    alphas: List[float]
    n_features: int
    errors: List[float] = field(default_factory=list)
    weight_sums: List[float] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.stumps)

    def score(self, features: np.ndarray) -> np.ndarray:
        """Normalized vote sum(alpha h) / sum(alpha), in [-1, 1]."""
        x = check_features(features, self.n_features)
        total = np.zeros(len(x))
        for stump, alpha in zip(self.stumps, self.alphas):
            total += alpha * stump.predict(x)
        return total / sum(self.alphas)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.score(features) > 0).astype(np.int64)

    def error_bound(self) -> List[float]:
        """Staged training-error bound prod_t 2 sqrt(eps_t (1 - eps_t))."""
        out, acc = [], 1.0
        for eps in self.errors:
            e = min(max(eps, EPS_CLAMP), 1 - EPS_CLAMP)
            acc *= 2.0 * math.sqrt(e * (1.0 - e))
            out.append(acc)
        return out


def best_stump(x: np.ndarray, y_pm: np.ndarray, w: np.ndarray) -> Tuple[Stump, float]:
    """Minimum weighted-error stump; thresholds sit midway between sorted unique values."""
    best, best_err = None, np.inf
    total_pos = float(w[y_pm > 0].sum())
    total_neg = float(w[y_pm < 0].sum())
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        wp = np.cumsum(np.where(y_pm[order] > 0, w[order], 0.0))
        wn = np.cumsum(np.where(y_pm[order] < 0, w[order], 0.0))
        cut = np.nonzero(xs[1:] > xs[:-1])[0]  # split after sorted position cut
        if cut.size == 0:
            continue
        # polarity +1: predict +1 above the threshold -> errors are positives below, negatives above
        err_plus = wp[cut] + (total_neg - wn[cut])
        err_minus = wn[cut] + (total_pos - wp[cut])
        for errs, polarity in ((err_plus, 1), (err_minus, -1)):
            k = int(np.argmin(errs))
            if errs[k] < best_err - 1e-15:
                best_err = float(errs[k])
                c = cut[k]
                best = Stump(f, float((xs[c] + xs[c + 1]) / 2.0), polarity)
    if best is None:  # every feature constant: fall back to the majority sign
        polarity = 1 if total_pos >= total_neg else -1
        best = Stump(0, float(x[0, 0]), -polarity)
        best_err = min(total_pos, total_neg)
    return best, best_err


def train_adaboost(features, labels, rounds: int = 50) -> AdaBoostModel:
    x, y = check_training_data(features, labels)
    y_pm = np.where(y == 1, 1.0, -1.0)
    w = np.full(len(x), 1.0 / len(x))
    model = AdaBoostModel([], [], x.shape[1])
    for _ in range(rounds):
        stump, eps = best_stump(x, y_pm, w)
        if eps >= 0.5:
            break
        e = min(max(eps, EPS_CLAMP), 1.0 - EPS_CLAMP)
        alpha = 0.5 * math.log((1.0 - e) / e)
        h = stump.predict(x)
        w = w * np.exp(-alpha * y_pm * h)
        w /= w.sum()
        model.stumps.append(stump)
        model.alphas.append(alpha)
        model.errors.append(eps)
        model.weight_sums.append(float(w.sum()))
        if eps <= 0.0:  # perfect weak learner: further rounds would repeat it
            break
    if not model.stumps:
        # no stump beats chance; keep the best one so predictions stay defined
        stump, eps = best_stump(x, y_pm, w)
        model.stumps.append(stump)
        model.alphas.append(1.0)
        model.errors.append(eps)
        model.weight_sums.append(float(w.sum()))
    return model
