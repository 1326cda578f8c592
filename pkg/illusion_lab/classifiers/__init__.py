"""From-scratch simple classifiers: default rule, 1R, LDA, pruned tree, perceptron"""
from typing import Dict, List, Optional, Sequence, Type

import numpy as np
from numpy.typing import ArrayLike

from ..dataset import Dataset
from ..exceptions import ConfigurationError, ShapeError
from ..schemas import FitConfig
from .base_classifier import (
    TIE_SCORE,
    BaseClassifier,
    ClassifierModel,
    class1_score,
    scores_to_labels,
)
from .default_rule import DefaultRule
from .lda import LinearDiscriminant
from .mlp import Perceptron, mlp_loss_and_gradient
from .one_r import OneR
from .tree import DecisionTree

CLASSIFIERS: Dict[str, Type[BaseClassifier]] = {
    'default': DefaultRule,
    'one-r': OneR,
    'lda': LinearDiscriminant,
    'tree': DecisionTree,
    'mlp': Perceptron,
}


def fit_default(data: Dataset) -> ClassifierModel:
    return DefaultRule().fit(data)


def fit_one_r(data: Dataset, cfg: Optional[FitConfig] = None) -> ClassifierModel:
    return OneR(cfg).fit(data)


def fit_lda(data: Dataset, cfg: Optional[FitConfig] = None) -> ClassifierModel:
    return LinearDiscriminant(cfg).fit(data)


def fit_tree(data: Dataset, cfg: Optional[FitConfig] = None) -> ClassifierModel:
    return DecisionTree(cfg).fit(data)


def fit_tree_path(data: Dataset, cfg: Optional[FitConfig], leaf_budgets: Sequence[int]) -> List[ClassifierModel]:
    """Nested pruned trees, one per budget, from a single growth"""
    return DecisionTree(cfg).fit_path(data, leaf_budgets)


def fit_mlp(data: Dataset, cfg: Optional[FitConfig] = None) -> ClassifierModel:
    return Perceptron(cfg).fit(data)


def fit_classifier(kind: str, data: Dataset, cfg: Optional[FitConfig] = None) -> ClassifierModel:
    if kind not in CLASSIFIERS:
        raise ConfigurationError(f"unknown classifier kind '{kind}', expected one of {sorted(CLASSIFIERS)}")
    return CLASSIFIERS[kind](cfg).fit(data)


def predict_scores(model: ClassifierModel, features: ArrayLike) -> np.ndarray:
    """Class-1 scores in [0, 1].

    A 1-D input is one row, except for one-feature models, where it is one
    value per row (the same reading Dataset gives a 1-D feature vector).
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1) if model.n_features == 1 else x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, got shape {x.shape}")
    if model.kind not in CLASSIFIERS:
        raise ConfigurationError(f"unknown classifier kind '{model.kind}'")
    scores = CLASSIFIERS[model.kind].score(model.parameters, x)
    return np.clip(scores, 0.0, 1.0)


def predict_labels(model: ClassifierModel, features: ArrayLike, threshold_odds: float = 1.0) -> np.ndarray:
    """Hard labels: 1 where the score odds reach threshold_odds"""
    return scores_to_labels(predict_scores(model, features), threshold_odds)


__all__ = [
    'CLASSIFIERS',
    'TIE_SCORE',
    'BaseClassifier',
    'ClassifierModel',
    'class1_score',
    'fit_classifier',
    'fit_default',
    'fit_lda',
    'fit_mlp',
    'fit_one_r',
    'fit_tree',
    'fit_tree_path',
    'mlp_loss_and_gradient',
    'predict_labels',
    'predict_scores',
    'scores_to_labels',
]
