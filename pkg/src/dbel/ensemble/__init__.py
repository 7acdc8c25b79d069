"""Classical classifiers over deep features and their majority-vote fusion."""
from dbel.ensemble.adaboost import AdaBoostModel, Stump, best_stump, train_adaboost
from dbel.ensemble.common import Standardizer
from dbel.ensemble.mlp import MlpClassifier, train_mlp
from dbel.ensemble.svm import LinearSvm, hinge_loss, objective, train_svm
from dbel.ensemble.voting import (
    CLASSIFIERS,
    EnsembleModel,
    EnsemblePrediction,
    ensemble_predict,
    majority_vote,
    predict_margin,
    train_ensemble,
    unit_score,
)

__all__ = [
    "AdaBoostModel", "CLASSIFIERS", "EnsembleModel", "EnsemblePrediction", "LinearSvm",
    "MlpClassifier", "Standardizer", "Stump", "best_stump", "ensemble_predict", "hinge_loss",
    "majority_vote", "objective", "predict_margin", "train_adaboost", "train_ensemble",
    "train_mlp", "train_svm", "unit_score",
]
