"""Hard majority vote over the three classifiers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from dbel.ensemble.adaboost import AdaBoostModel, train_adaboost
from dbel.ensemble.mlp import MlpClassifier, train_mlp
from dbel.ensemble.svm import LinearSvm, train_svm
from dbel.errors import DimensionError

CLASSIFIERS = ("svm", "mlp", "adaboost")


@dataclass
class Margin:
    score: np.ndarray
    label: np.ndarray


def predict_margin(classifier, features) -> Margin:
    """Per-row score and hard label for any of the three classifier types."""
    if isinstance(classifier, LinearSvm):
        score = classifier.decision(features)
        return Margin(score, (score > 0).astype(np.int64))
    if isinstance(classifier, MlpClassifier):
        score = classifier.predict_proba(features)[:, 1]
        return Margin(score, (score > 0.5).astype(np.int64))
    if isinstance(classifier, AdaBoostModel):
        score = classifier.score(features)
        return Margin(score, (score > 0).astype(np.int64))
    raise TypeError(f"unsupported classifier {type(classifier).__name__}")


def unit_score(classifier, score: np.ndarray) -> np.ndarray:
    """Map a classifier score onto [0, 1] (logistic for SVM margins)."""
    if isinstance(classifier, LinearSvm):
        return 1.0 / (1.0 + np.exp(-np.clip(score, -500, 500)))
    if isinstance(classifier, AdaBoostModel):
        return (score + 1.0) / 2.0
    return score


def majority_vote(*votes) -> np.ndarray:
    """Label chosen by at least two of three binary voters."""
    if len(votes) == 1:
        votes = tuple(votes[0])
    arrays = [np.asarray(v, dtype=np.int64).reshape(-1) for v in votes]
    if len(arrays) != 3:
        raise DimensionError(f"expected three voters, got {len(arrays)}")
    if len({a.shape[0] for a in arrays}) != 1:
        raise DimensionError("vote arrays have different lengths")
    return (np.sum(arrays, axis=0) >= 2).astype(np.int64)


@dataclass
class EnsembleModel:
    svm: LinearSvm
    mlp: MlpClassifier
    adaboost: AdaBoostModel

    @property
    def n_features(self) -> int:
        return len(self.svm.weights)

    def members(self) -> Dict[str, object]:
        return {"svm": self.svm, "mlp": self.mlp, "adaboost": self.adaboost}


@dataclass
class EnsemblePrediction:
    labels: np.ndarray
    score: np.ndarray
    member_scores: Dict[str, np.ndarray]
    member_labels: Dict[str, np.ndarray]


def ensemble_predict(model: EnsembleModel, features, order=CLASSIFIERS) -> EnsemblePrediction:
    members = model.members()
    margins = {name: predict_margin(members[name], features) for name in order}
    labels = majority_vote(*(margins[name].label for name in order))
    unit = [unit_score(members[name], margins[name].score) for name in order]
    return EnsemblePrediction(
        labels=labels,
        score=np.mean(unit, axis=0),
        member_scores={k: m.score for k, m in margins.items()},
        member_labels={k: m.label for k, m in margins.items()},
    )


def train_ensemble(features, labels, svm_lambda: float = 1e-4, svm_epochs: int = 20,
                   mlp_hidden: int = 64, mlp_epochs: int = 100, mlp_lr: float = 0.01,
                   ada_rounds: int = 50, seed: int = 0) -> EnsembleModel:
    return EnsembleModel(
        svm=train_svm(features, labels, lam=svm_lambda, epochs=svm_epochs, seed=seed),
        mlp=train_mlp(features, labels, hidden=mlp_hidden, epochs=mlp_epochs, lr=mlp_lr, seed=seed),
        adaboost=train_adaboost(features, labels, rounds=ada_rounds),
    )
