"""Base classifier class and the fitted-model container"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..dataset import Dataset
from ..exceptions import PreconditionError
from ..schemas import FitConfig

# Class-1 score of an exact class tie: one ulp below 0.5, so labels at k = 1 go to class 0
TIE_SCORE = float(np.nextafter(0.5, 0.0))


def class1_score(n1: int, n: int) -> float:
    """Training class-1 fraction, with ties resolved toward class 0"""
    if 2 * n1 == n:
        return TIE_SCORE
    return n1 / n


def scores_to_labels(scores: np.ndarray, threshold_odds: float = 1.0) -> np.ndarray:
    """Label 1 where the score odds s/(1-s) reach threshold_odds"""
    if not threshold_odds > 0.0:
        raise PreconditionError(f"threshold odds must be positive, got {threshold_odds}")
    if np.isinf(threshold_odds):
        return np.zeros(len(scores), dtype=np.int64)
    return (np.asarray(scores) >= threshold_odds / (1.0 + threshold_odds)).astype(np.int64)


def _freeze_parameters(parameters: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    frozen = {}
    for name, value in parameters.items():
        array = np.array(value, copy=True)
        array.setflags(write=False)
        frozen[name] = array
    return frozen


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """A fitted classifier.

    `parameters` holds everything scoring needs and is what gets serialized;
    `diagnostics` holds fit traces such as the loss history.
    """

    kind: str
    parameters: Dict[str, np.ndarray]
    complexity: int
    n_features: int
    feature_names: Tuple[str, ...] = ()
    diagnostics: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'parameters', _freeze_parameters(self.parameters))
        object.__setattr__(self, 'diagnostics', _freeze_parameters(self.diagnostics))


class BaseClassifier:
    """Base class for all classifiers"""

    kind: str = ''

    def __init__(self, cfg: Optional[FitConfig] = None):
        self.cfg = cfg or FitConfig()

    def fit(self, data: Dataset) -> ClassifierModel:
        raise NotImplementedError

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        """Class-1 scores for a validated n x p feature matrix"""
        raise NotImplementedError

    def _require_both_classes(self, data: Dataset) -> None:
        if not data.has_both_classes():
            raise PreconditionError(f"{self.kind} needs both classes in the design set")

    def _model(self, data: Dataset, parameters: Dict[str, np.ndarray], complexity: int,
               diagnostics: Optional[Dict[str, np.ndarray]] = None) -> ClassifierModel:
        return ClassifierModel(
            kind=self.kind,
            parameters=parameters,
            complexity=complexity,
            n_features=data.n_features,
            feature_names=data.feature_names,
            diagnostics=diagnostics or {},
        )
