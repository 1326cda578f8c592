"""Performance measures, Bayes rates, smoothing and temporal evaluation"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg, stats

from .classifiers import ClassifierModel, predict_scores, scores_to_labels
from .config import Config
from .dataset import Dataset
from .exceptions import PreconditionError, UndefinedRatioError
from .synthdata import GaussianClassSpec, Stream

logger = logging.getLogger(__name__)

METRIC_NAMES = ('error-rate', 'cost-weighted', 'brier', 'auc')
UNIT_INTERVAL_METRICS = ('error-rate', 'brier', 'auc')
HIGHER_IS_BETTER = ('auc',)


@dataclass(frozen=True)
class MetricKind:
    """A performance measure; cost_ratio is c0/c1 (cost of a class-0 error over a class-1 error)"""

    name: str
    cost_ratio: Optional[Union[float, Fraction]] = None

    def __post_init__(self):
        if self.name not in METRIC_NAMES:
            raise PreconditionError(f"unknown metric '{self.name}', expected one of {METRIC_NAMES}")
        if self.name == 'cost-weighted':
            if self.cost_ratio is None or not self.cost_ratio > 0:
                raise PreconditionError(f"cost-weighted needs a positive cost_ratio, got {self.cost_ratio}")
            object.__setattr__(self, 'cost_ratio', Fraction(self.cost_ratio))

    @classmethod
    def balanced_cost(cls, labels: ArrayLike) -> "MetricKind":
        """Cost-weighted measure with c0/c1 = pi1/pi0 taken from labels"""
        labels = np.asarray(labels)
        n1 = int(labels.sum())
        n0 = labels.shape[0] - n1
        if n0 == 0 or n1 == 0:
            raise PreconditionError("balanced costs need both classes")
        return cls('cost-weighted', Fraction(n1, n0))


@dataclass(frozen=True)
class EvalRecord:
    """One result row; index is a time step or a complexity level"""

    index: float
    metric: str
    value: float
    ci_half_width: float = 0.0
    label: str = ''

    def __post_init__(self):
        if self.metric in UNIT_INTERVAL_METRICS and not 0.0 <= self.value <= 1.0:
            raise PreconditionError(f"{self.metric} value {self.value} outside [0, 1]")
        if self.metric == 'cost-weighted' and not self.value >= 0.0:
            raise PreconditionError(f"cost-weighted value {self.value} is negative")
        if not self.ci_half_width >= 0.0:
            raise PreconditionError(f"ci_half_width {self.ci_half_width} is negative")


def _check_inputs(scores: ArrayLike, labels: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 1 or scores.shape != labels.shape or scores.size == 0:
        raise PreconditionError(f"scores and labels must be equal-length vectors, got {scores.shape} and {labels.shape}")
    if np.any((scores < 0.0) | (scores > 1.0)):
        raise PreconditionError("scores must lie in [0, 1]")
    if np.any((labels != 0) & (labels != 1)):
        raise PreconditionError("labels must be in {0, 1}")
    return scores, labels


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney probability that a class-1 case outscores a class-0 case, ties 1/2"""
    n1 = int(labels.sum())
    n0 = labels.shape[0] - n1
    if n0 == 0 or n1 == 0:
        raise PreconditionError("auc needs both classes")
    ranks = stats.rankdata(scores)
    return float((ranks[labels == 1].sum() - n1 * (n1 + 1) / 2.0) / (n0 * n1))


def evaluate(metric: MetricKind, scores: ArrayLike, labels: ArrayLike, threshold_odds: float = 1.0) -> float:
    scores, labels = _check_inputs(scores, labels)
    n = labels.shape[0]
    if metric.name == 'brier':
        return float(np.mean((scores - labels) ** 2))
    if metric.name == 'auc':
        return auc(scores, labels)

    predicted = scores_to_labels(scores, threshold_odds)
    false_1 = int(np.sum((labels == 0) & (predicted == 1)))
    false_0 = int(np.sum((labels == 1) & (predicted == 0)))
    if metric.name == 'error-rate':
        return (false_1 + false_0) / n
    # normalized by c1, in exact arithmetic
    return float((metric.cost_ratio * false_1 + false_0) / n)


def proportion_achievable(m0: float, m_simple: float, m_best: float) -> float:
    """(m0 - mL) / (m0 - mT): share of the default-to-best gap a simple method captures"""
    if m_simple < 0.0 or m_simple > m0:
        raise PreconditionError(f"need m0 >= mL >= 0, got m0={m0}, mL={m_simple}")
    if m0 == m_best:
        raise UndefinedRatioError(f"m0 equals mT ({m0}); the proportion is undefined")
    if m0 < m_best:
        raise PreconditionError(f"need m0 > mT, got m0={m0}, mT={m_best}")
    return (m0 - m_simple) / (m0 - m_best)


def improvement_bound(m_current: float, m_bayes: float) -> float:
    """Largest possible further reduction m - m_b"""
    if m_bayes > m_current:
        raise PreconditionError(f"Bayes error {m_bayes} exceeds current error {m_current}")
    return m_current - m_bayes


def bayes_error_gaussian(spec: GaussianClassSpec) -> float:
    """Error of the optimal rule for two Gaussians with a shared covariance"""
    if spec.sigma1 is not None:
        raise PreconditionError("the closed form needs a shared covariance")
    pi1 = spec.prior1
    pi0 = 1.0 - pi1
    distance = spec.mahalanobis
    if distance == 0.0:
        return min(pi0, pi1)
    log_prior = math.log(pi1 / pi0)
    return float(
        pi0 * stats.norm.cdf(-distance / 2.0 + log_prior / distance)
        + pi1 * stats.norm.cdf(-distance / 2.0 - log_prior / distance)
    )


def lowess_smooth(x: ArrayLike, y: ArrayLike, span: float = Config.DEFAULT_LOWESS_SPAN) -> np.ndarray:
    """Plain lowess: tricube-weighted local linear fit at every point.

    Each point uses its r = ceil(span * n) nearest neighbours (itself included);
    the bandwidth is the distance to the next one. When r = n there is no next
    neighbour and the bandwidth is capped at the farthest point, which then
    gets weight 0, so span 1 fits like span (n - 1) / n.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    if y.shape != x.shape:
        raise PreconditionError("x and y must have equal length")
    if not 0.0 < span <= 1.0:
        raise PreconditionError(f"span must lie in (0, 1], got {span}")
    if n > 1 and np.any(np.diff(x) <= 0.0):
        raise PreconditionError("x must be strictly increasing")
    r = int(math.ceil(span * n))
    if r < 2:
        raise PreconditionError(f"span {span} covers {r} point(s) of {n}; need at least 2")

    fitted = np.empty(n)
    for i in range(n):
        distance = np.abs(x - x[i])
        bandwidth = np.sort(distance)[min(r, n - 1)]
        weights = (1.0 - np.clip(distance / bandwidth, 0.0, 1.0) ** 3) ** 3
        root = np.sqrt(weights)
        design = np.column_stack([np.ones(n), x - x[i]]) * root[:, None]
        coefficients = linalg.lstsq(design, y * root)[0]
        fitted[i] = coefficients[0]
    return fitted


def confidence_interval(values: ArrayLike) -> Tuple[float, float]:
    """(mean, normal-approximation 95% half-width)"""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise PreconditionError(f"need at least 2 values, got {values.size}")
    half_width = Config.CI_Z * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return float(np.mean(values)), half_width


@dataclass(frozen=True)
class TrendTest:
    tau: float
    p_value: float


def mann_kendall(values: ArrayLike) -> TrendTest:
    """Kendall tau of the values against their order, with its p-value"""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3:
        raise PreconditionError("a trend test needs at least 3 values")
    if np.all(values == values[0]):
        return TrendTest(tau=0.0, p_value=1.0)
    tau, p_value = stats.kendalltau(np.arange(values.size), values)
    return TrendTest(tau=float(tau), p_value=float(p_value))


def temporal_evaluate(model: ClassifierModel, stream: Union[Stream, Sequence[Dataset]], metric: MetricKind,
                      threshold_odds: float = 1.0, label: str = '') -> List[EvalRecord]:
    """One raw record per batch, in time order"""
    batches = list(stream)
    if not batches:
        raise PreconditionError("stream is empty")
    records = []
    for position, batch in enumerate(batches, start=1):
        index = position if batch.time_index is None else int(batch.time_index[0])
        value = evaluate(metric, predict_scores(model, batch.features), batch.labels, threshold_odds)
        records.append(EvalRecord(index=index, metric=metric.name, value=value, label=label or model.kind))
    return records


def smooth_records(records: Sequence[EvalRecord], span: float = Config.DEFAULT_LOWESS_SPAN) -> List[EvalRecord]:
    """Lowess-smoothed copies of a record sequence, metric suffixed ':lowess'"""
    x = [r.index for r in records]
    smoothed = lowess_smooth(x, [r.value for r in records], span)
    return [
        EvalRecord(index=r.index, metric=f"{r.metric}:lowess", value=float(v), label=r.label)
        for r, v in zip(records, smoothed)
    ]


def rank_methods(values: Mapping[str, float], metric: str) -> Dict[str, float]:
    """Rank 1 is best; ties share the average rank"""
    names = list(values)
    raw = np.array([values[name] for name in names], dtype=np.float64)
    if metric in HIGHER_IS_BETTER:
        raw = -raw
    return dict(zip(names, (float(r) for r in stats.rankdata(raw))))


def ranking_agreement(rankings: Mapping[str, Mapping[str, float]]) -> List[Tuple[str, str, float]]:
    """Kendall tau between the method rankings of every metric pair"""
    metrics = list(rankings)
    agreement = []
    for first, second in combinations(metrics, 2):
        methods = list(rankings[first])
        a = [rankings[first][m] for m in methods]
        b = [rankings[second][m] for m in methods]
        if len(methods) < 2 or len(set(a)) == 1 or len(set(b)) == 1:
            tau = float('nan')
        else:
            tau = float(stats.kendalltau(a, b)[0])
        agreement.append((first, second, tau))
    return agreement

