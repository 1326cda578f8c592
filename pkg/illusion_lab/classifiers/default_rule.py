"""Default rule: assign every point to the majority design class"""
from typing import Dict

import numpy as np

from ..dataset import Dataset
from .base_classifier import BaseClassifier, ClassifierModel, class1_score


class DefaultRule(BaseClassifier):
    """Predicts the majority class of the design set; ties go to class 0"""

    kind = 'default'

    def fit(self, data: Dataset) -> ClassifierModel:
        _, n1 = data.class_counts()
        return self._model(data, {'score': np.array([class1_score(n1, data.n_rows)])}, complexity=1)

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        return np.full(features.shape[0], float(parameters['score'][0]))
