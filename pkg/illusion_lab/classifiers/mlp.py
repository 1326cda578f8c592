"""Single-hidden-layer perceptron trained by full-batch gradient descent"""
import logging
from typing import Dict, Tuple

import numpy as np
from scipy.special import expit

from ..config import Config
from ..dataset import Dataset
from ..exceptions import PreconditionError
from ..rng import rng_for
from .base_classifier import BaseClassifier, ClassifierModel, class1_score

logger = logging.getLogger(__name__)

WEIGHT_NAMES = ('w1', 'b1', 'w2', 'b2')


def standardization(features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Design-set column means and scales; constant columns keep scale 1"""
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def forward(weights: Dict[str, np.ndarray], xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    hidden = expit(xs @ weights['w1'] + weights['b1'])
    return hidden, hidden @ weights['w2'] + weights['b2'][0]


def mlp_loss_and_gradient(weights: Dict[str, np.ndarray], xs: np.ndarray,
                          y: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean cross-entropy on standardized features and its gradient"""
    hidden, z = forward(weights, xs)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (expit(z) - y) / len(y)
    dhidden = np.outer(dz, weights['w2']) * hidden * (1.0 - hidden)
    gradient = {
        'w1': xs.T @ dhidden,
        'b1': dhidden.sum(axis=0),
        'w2': hidden.T @ dz,
        'b2': np.array([dz.sum()]),
    }
    return loss, gradient


class Perceptron(BaseClassifier):
    """Logistic hidden units, logistic output, cross-entropy loss.

    With hidden_nodes = 0 the fit is the default rule. Learning rates up to
    Config.MLP_STABLE_LEARNING_RATE keep the design loss nonincreasing on the
    standardized scale.
    """

    kind = 'mlp'

    def fit(self, data: Dataset) -> ClassifierModel:
        cfg = self.cfg
        if not cfg.learning_rate > 0.0:
            raise PreconditionError(f"learning_rate must be positive, got {cfg.learning_rate}")
        self._require_both_classes(data)
        if cfg.hidden_nodes == 0:
            _, n1 = data.class_counts()
            return self._model(data, {'score': np.array([class1_score(n1, data.n_rows)])}, complexity=0)
        if cfg.learning_rate > Config.MLP_STABLE_LEARNING_RATE:
            logger.debug(f"learning_rate {cfg.learning_rate} exceeds the stable bound, loss may oscillate")

        mean, scale = standardization(data.features)
        xs = (data.features - mean) / scale
        y = data.labels.astype(np.float64)

        rng = rng_for(cfg.seed)
        bound = Config.MLP_INIT_RANGE
        p, h = data.n_features, cfg.hidden_nodes
        weights = {
            'w1': rng.uniform(-bound, bound, size=(p, h)),
            'b1': rng.uniform(-bound, bound, size=h),
            'w2': rng.uniform(-bound, bound, size=h),
            'b2': rng.uniform(-bound, bound, size=1),
        }

        history = np.empty(cfg.epochs + 1)
        for epoch in range(cfg.epochs):
            loss, gradient = mlp_loss_and_gradient(weights, xs, y)
            history[epoch] = loss
            for name in WEIGHT_NAMES:
                weights[name] = weights[name] - cfg.learning_rate * gradient[name]
        history[-1] = mlp_loss_and_gradient(weights, xs, y)[0]
        logger.debug(f"mlp with {h} hidden nodes: loss {history[0]:.6g} -> {history[-1]:.6g}")

        return self._model(
            data,
            {'mean': mean, 'scale': scale, **weights},
            complexity=h,
            diagnostics={'loss_history': history},
        )

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        if 'score' in parameters:
            return np.full(features.shape[0], float(parameters['score'][0]))
        xs = (features - parameters['mean']) / parameters['scale']
        return expit(forward(parameters, xs)[1])
