"""Binary Gini tree grown to min_leaf granularity and pruned back to a leaf budget.

Pruning removes one leaf per step: among nodes whose two children are both
leaves, the one whose collapse adds the fewest training errors goes first
(lowest node id on ties). The collapse order does not depend on the budget,
so the trees for budgets 1, 2, ... are nested.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..dataset import Dataset
from ..exceptions import PreconditionError
from .base_classifier import BaseClassifier, ClassifierModel, class1_score

logger = logging.getLogger(__name__)

MIN_DECREASE = 1e-12


def gini_mass(ones, n):
    """n times the Gini impurity of a node with `ones` class-1 rows out of n"""
    ones = np.asarray(ones, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return 2.0 * ones * (n - ones) / n


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """(decrease, feature, threshold) of the best split, feature -1 when none helps"""
    n = len(y)
    total = int(y.sum())
    parent = float(gini_mass(total, n))
    best = (0.0, -1, 0.0)
    if n < 2 * min_leaf:
        return best

    left_n = np.arange(1, n)
    right_n = n - left_n
    size_ok = (left_n >= min_leaf) & (right_n >= min_leaf)
    for j in range(x.shape[1]):
        order = np.argsort(x[:, j], kind='stable')
        xs = x[order, j]
        left_ones = np.cumsum(y[order])[:-1]
        valid = size_ok & (xs[:-1] != xs[1:])
        if not valid.any():
            continue
        decrease = parent - gini_mass(left_ones, left_n) - gini_mass(total - left_ones, right_n)
        decrease = np.where(valid, decrease, -np.inf)
        top = decrease.max()
        # lowest threshold among numerically tied candidates
        i = int(np.flatnonzero(decrease >= top - MIN_DECREASE)[0])
        if decrease[i] > best[0] + MIN_DECREASE:
            best = (float(decrease[i]), j, float((xs[i] + xs[i + 1]) / 2.0))
    return best


@dataclass
class _Node:
    rows: np.ndarray
    n1: int
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1

    @property
    def errors(self) -> int:
        return min(self.n1, len(self.rows) - self.n1)

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


class GrownTree:
    """A fully grown tree plus its budget-independent pruning sequence"""

    def __init__(self, data: Dataset, min_leaf: int):
        self.data = data
        self.nodes: List[_Node] = []
        self._grow(min_leaf)
        self.grown_leaves = sum(node.is_leaf for node in self.nodes)
        self.collapse_order = self._pruning_sequence()
        logger.debug(f"grew tree with {len(self.nodes)} nodes and {self.grown_leaves} leaves")

    def _grow(self, min_leaf: int) -> None:
        x, y = self.data.features, self.data.labels
        rows = np.arange(self.data.n_rows)
        self.nodes.append(_Node(rows=rows, n1=int(y.sum())))
        queue = deque([0])
        while queue:
            node_id = queue.popleft()
            node = self.nodes[node_id]
            if node.errors == 0:
                continue
            decrease, feature, threshold = best_split(x[node.rows], y[node.rows], min_leaf)
            if feature < 0:
                continue
            goes_left = x[node.rows, feature] <= threshold
            for side in (node.rows[goes_left], node.rows[~goes_left]):
                self.nodes.append(_Node(rows=side, n1=int(y[side].sum())))
                queue.append(len(self.nodes) - 1)
            node.feature, node.threshold = feature, threshold
            node.left, node.right = len(self.nodes) - 2, len(self.nodes) - 1

    def _pruning_sequence(self) -> List[int]:
        leaf = [node.is_leaf for node in self.nodes]
        order = []
        for _ in range(self.grown_leaves - 1):
            best_cost, best_id = None, None
            for node_id, node in enumerate(self.nodes):
                if leaf[node_id] or not (leaf[node.left] and leaf[node.right]):
                    continue
                cost = node.errors - self.nodes[node.left].errors - self.nodes[node.right].errors
                if best_cost is None or cost < best_cost:
                    best_cost, best_id = cost, node_id
            leaf[best_id] = True
            order.append(best_id)
        return order

    def pruned(self, max_leaves: int) -> Dict[str, np.ndarray]:
        """Compact parameter arrays of the tree pruned to min(max_leaves, grown) leaves"""
        if max_leaves < 1:
            raise PreconditionError(f"max_leaves must be at least 1, got {max_leaves}")
        steps = max(0, self.grown_leaves - max_leaves)
        collapsed = set(self.collapse_order[:steps])

        feature, threshold, left, right, value = [], [], [], [], []
        queue = deque([(0, -1, False)])
        while queue:
            node_id, parent, is_right = queue.popleft()
            node = self.nodes[node_id]
            new_id = len(feature)
            if parent >= 0:
                (right if is_right else left)[parent] = new_id
            value.append(class1_score(node.n1, len(node.rows)))
            left.append(-1)
            right.append(-1)
            if node.is_leaf or node_id in collapsed:
                feature.append(-1)
                threshold.append(0.0)
            else:
                feature.append(node.feature)
                threshold.append(node.threshold)
                queue.append((node.left, new_id, False))
                queue.append((node.right, new_id, True))

        return {
            'feature': np.array(feature, dtype=np.int64),
            'threshold': np.array(threshold, dtype=np.float64),
            'left': np.array(left, dtype=np.int64),
            'right': np.array(right, dtype=np.int64),
            'value': np.array(value, dtype=np.float64),
        }


def leaf_count(parameters: Dict[str, np.ndarray]) -> int:
    return int(np.sum(parameters['feature'] < 0))


class DecisionTree(BaseClassifier):
    """Gini tree with weakest-link pruning to cfg.max_leaves"""

    kind = 'tree'

    def fit(self, data: Dataset) -> ClassifierModel:
        return self.fit_path(data, [self.cfg.max_leaves])[0]

    def fit_path(self, data: Dataset, leaf_budgets: Sequence[int]) -> List[ClassifierModel]:
        """One growth, one pruned model per budget"""
        self._require_both_classes(data)
        for budget in leaf_budgets:
            if budget < 1:
                raise PreconditionError(f"max_leaves must be at least 1, got {budget}")
        grown = GrownTree(data, self.cfg.min_leaf)
        models = []
        for budget in leaf_budgets:
            parameters = grown.pruned(budget)
            models.append(self._model(data, parameters, complexity=leaf_count(parameters)))
        return models

    @staticmethod
    def score(parameters: Dict[str, np.ndarray], features: np.ndarray) -> np.ndarray:
        feature = parameters['feature']
        threshold = parameters['threshold']
        node = np.zeros(features.shape[0], dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            current = node[rows]
            goes_left = features[rows, feature[current]] <= threshold[current]
            node[rows] = np.where(goes_left, parameters['left'][current], parameters['right'][current])
            active = feature[node] >= 0
        return parameters['value'][node]
