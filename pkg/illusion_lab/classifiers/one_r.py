"""1R: a multiple-split single-level tree on one feature"""
import logging
from typing import Dict

import numpy as np

from ..dataset import Dataset
from .base_classifier import BaseClassifier, ClassifierModel, class1_score

logger = logging.getLogger(__name__)


def equal_frequency_thresholds(values: np.ndarray, n_cells: int) -> np.ndarray:
    """Midpoint cuts splitting sorted values into roughly equal-count cells.

    Cuts that would fall between equal values are dropped, so fewer than
    n_cells cells may result.
    """
    ordered = np.sort(values)
    n = len(ordered)
    positions = np.unique(np.rint(np.arange(1, n_cells) * n / n_cells).astype(np.int64))
    positions = positions[(positions > 0) & (positions < n)]
    keep = ordered[positions - 1] != ordered[positions]
    positions = positions[keep]
    return np.unique((ordered[positions - 1] + ordered[positions]) / 2.0)


def _cells(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    # x equal to a threshold belongs to the lower cell
    return np.searchsorted(thresholds, values, side='left')


class OneR(BaseClassifier):
    """Picks the single feature whose equal-frequency partition has fewest training errors"""

    kind = 'one-r'

    def fit(self, data: Dataset) -> ClassifierModel:
        self._require_both_classes(data)
        labels = data.labels
        best = None
        best_fit = None

        for j in range(data.n_features):
            column = data.features[:, j]
            seen = set()
            for n_cells in range(2, self.cfg.bins + 1):
                thresholds = equal_frequency_thresholds(column, n_cells)
                signature = tuple(thresholds)
                if signature in seen:
                    continue
                seen.add(signature)

                cells = _cells(column, thresholds)
                size = np.bincount(cells, minlength=len(thresholds) + 1)
                ones = np.bincount(cells, weights=labels, minlength=len(thresholds) + 1).astype(np.int64)
                errors = int(np.minimum(ones, size - ones).sum())
                key = (errors, j, len(thresholds) + 1)
                if best is None or key < best:
                    best = key
                    scores = np.array([class1_score(int(o), int(s)) for o, s in zip(ones, size)])
                    best_fit = (j, thresholds, scores)

        feature, thresholds, scores = best_fit
        logger.debug(f"1R picked {data.feature_names[feature]} with {len(scores)} cells, {best[0]} training errors")
        return self._model(
            data,
            {
                'feature': np.array([feature], dtype=np.int64),
                'thresholds': thresholds,
                'cell_scores': scores,
            },
            complexity=1,
        )

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        column = features[:, int(parameters['feature'][0])]
        return parameters['cell_scores'][_cells(column, parameters['thresholds'])]
