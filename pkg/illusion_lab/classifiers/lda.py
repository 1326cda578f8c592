"""Fisher linear discriminant with a pooled covariance"""
import logging
from typing import Dict

import numpy as np
from scipy import linalg
from scipy.special import expit

from ..config import Config
from ..dataset import Dataset
from ..exceptions import PreconditionError, ValidityError
from .base_classifier import BaseClassifier, ClassifierModel

logger = logging.getLogger(__name__)


def pooled_covariance(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Within-class scatter over n - 2 degrees of freedom"""
    scatter = np.zeros((features.shape[1], features.shape[1]))
    for cls in (0, 1):
        centered = features[labels == cls] - features[labels == cls].mean(axis=0)
        scatter += centered.T @ centered
    return scatter / (features.shape[0] - 2)


class LinearDiscriminant(BaseClassifier):
    """Equal-covariance Gaussian posterior with training priors"""

    kind = 'lda'

    def _ridge_ladder(self):
        return [self.cfg.ridge] + [r for r in Config.LDA_RIDGE_LADDER if r > self.cfg.ridge]

    def _factor(self, covariance: np.ndarray):
        identity = np.eye(covariance.shape[0])
        for ridge in self._ridge_ladder():
            regularized = covariance + ridge * identity
            try:
                factor = linalg.cho_factor(regularized, lower=True, check_finite=False)
            except linalg.LinAlgError:
                logger.debug(f"pooled covariance not factorizable with ridge {ridge:g}")
                continue
            if np.linalg.cond(regularized) > Config.LDA_MAX_CONDITION:
                logger.debug(f"pooled covariance ill-conditioned with ridge {ridge:g}")
                continue
            return factor, ridge
        raise ValidityError("pooled covariance stays singular after ridge escalation")

    def fit(self, data: Dataset) -> ClassifierModel:
        self._require_both_classes(data)
        n0, n1 = data.class_counts()
        if n0 < 2 or n1 < 2:
            raise PreconditionError(f"LDA needs at least 2 rows per class, got {n0} and {n1}")

        x, y = data.features, data.labels
        mu0 = x[y == 0].mean(axis=0)
        mu1 = x[y == 1].mean(axis=0)
        factor, ridge = self._factor(pooled_covariance(x, y))
        weights = linalg.cho_solve(factor, mu1 - mu0, check_finite=False)
        intercept = -0.5 * float((mu1 + mu0) @ weights) + float(np.log(n1 / n0))

        return self._model(
            data,
            {'weights': weights, 'intercept': np.array([intercept])},
            complexity=data.n_features,
            diagnostics={'ridge': np.array([ridge])},
        )

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        return expit(features @ parameters['weights'] + parameters['intercept'][0])
