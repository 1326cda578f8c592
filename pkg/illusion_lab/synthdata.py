"""Seeded generators: equicorrelated regression data, two-class Gaussians, drifting streams.

A stream batch is built in a fixed order: features, latent score, threshold
labels, label noise, selection. Batch t draws from rng_for(seed, t) and its
label noise from the derived substream (seed, t, 1).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit

from .analytic import CorrMatrix, EquicorrSpec, build_equicorr_sigma
from .dataset import Dataset
from .exceptions import (
    ConfigurationError,
    ConstraintError,
    DegenerateInputError,
    PreconditionError,
    ShapeError,
    ValidityError,
)
from .rng import derive_seed, rng_for

logger = logging.getLogger(__name__)

NOISE_SUBSTREAM = 1


def sampling_factor(sigma: np.ndarray) -> np.ndarray:
    """L with L L^T = sigma; eigen-factor with clipped eigenvalues for singular PSD input"""
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        values, vectors = np.linalg.eigh(sigma)
        return vectors * np.sqrt(np.clip(values, 0.0, None))


def _vector(value: ArrayLike) -> np.ndarray:
    array = np.array(value, dtype=np.float64, copy=True).reshape(-1)
    array.setflags(write=False)
    return array


def _covariance(name: str, value: ArrayLike, p: int) -> np.ndarray:
    array = np.array(value, dtype=np.float64, copy=True)
    if array.shape != (p, p):
        raise ShapeError(f"{name} must be {p}x{p}, got shape {array.shape}")
    if not np.allclose(array, array.T):
        raise ValidityError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(array)
    except np.linalg.LinAlgError as e:
        raise ValidityError(f"{name} must be positive definite") from e
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GaussianClassSpec:
    """Two Gaussian classes; sigma is shared unless sigma1 gives class 1 its own"""

    mu0: np.ndarray
    mu1: np.ndarray
    sigma: np.ndarray
    prior1: float
    sigma1: Optional[np.ndarray] = None

    def __post_init__(self):
        mu0 = _vector(self.mu0)
        mu1 = _vector(self.mu1)
        if mu0.shape != mu1.shape:
            raise ShapeError(f"class means differ in length: {mu0.shape} vs {mu1.shape}")
        p = mu0.shape[0]
        if not 0.0 < self.prior1 < 1.0:
            raise ConstraintError(f"prior1 must lie in (0, 1), got {self.prior1}")
        object.__setattr__(self, 'mu0', mu0)
        object.__setattr__(self, 'mu1', mu1)
        object.__setattr__(self, 'sigma', _covariance('sigma', self.sigma, p))
        if self.sigma1 is not None:
            object.__setattr__(self, 'sigma1', _covariance('sigma1', self.sigma1, p))

    @property
    def p(self) -> int:
        return self.mu0.shape[0]

    @property
    def class1_sigma(self) -> np.ndarray:
        return self.sigma if self.sigma1 is None else self.sigma1

    @property
    def direction(self) -> np.ndarray:
        """Sigma^-1 (mu1 - mu0), the class-1 linear score direction"""
        return np.linalg.solve(self.sigma, self.mu1 - self.mu0)

    @property
    def mahalanobis(self) -> float:
        return float(np.sqrt((self.mu1 - self.mu0) @ self.direction))


def class1_posterior(spec: GaussianClassSpec, features: ArrayLike) -> np.ndarray:
    """True P(class 1 | x) under a shared-covariance spec"""
    if spec.sigma1 is not None:
        raise PreconditionError("the linear posterior needs a shared covariance")
    w = spec.direction
    intercept = -0.5 * float((spec.mu0 + spec.mu1) @ w) + math.log(spec.prior1 / (1.0 - spec.prior1))
    return expit(np.asarray(features, dtype=np.float64) @ w + intercept)


def gen_equicorr_samples(spec: EquicorrSpec, n: int, seed: int) -> Dataset:
    """Zero-mean unit-variance Gaussian draws; the response is the last column"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    factor = sampling_factor(build_equicorr_sigma(spec))
    draws = rng_for(seed).standard_normal((n, spec.d + 1)) @ factor.T
    names = tuple(f"x{j + 1}" for j in range(spec.d)) + ('response',)
    return Dataset(features=draws, labels=np.zeros(n, dtype=np.int64), feature_names=names)


def _draw_two_class(rng: np.random.Generator, n: int, prior1: float, mu0: np.ndarray, mu1: np.ndarray,
                    factor0: np.ndarray, factor1: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    labels = (rng.random(n) < prior1).astype(np.int64)
    noise = rng.standard_normal((n, mu0.shape[0]))
    features = np.where(
        labels[:, None] == 1,
        mu1 + noise @ factor1.T,
        mu0 + noise @ factor0.T,
    )
    return features, labels


def gen_gaussian_two_class(spec: GaussianClassSpec, n: int, seed: int) -> Dataset:
    """Bernoulli(prior1) labels, class-conditional Gaussian features, linear latent score"""
    if n < 2:
        raise PreconditionError(f"n must be at least 2, got {n}")
    features, labels = _draw_two_class(
        rng_for(seed), n, spec.prior1, spec.mu0, spec.mu1,
        sampling_factor(spec.sigma), sampling_factor(spec.class1_sigma),
    )
    return Dataset(features=features, labels=labels, latent_score=features @ spec.direction)


def label_flip_mask(n: int, delta: float, seed: int) -> np.ndarray:
    """Rows whose label is flipped: the seeded uniform stream falls below delta"""
    return rng_for(seed).random(n) < delta


def inject_label_noise(data: Dataset, delta: float, seed: int) -> Dataset:
    if not 0.0 <= delta < 0.5:
        raise PreconditionError(f"delta must lie in [0, 0.5), got {delta}")
    mask = label_flip_mask(data.n_rows, delta, seed)
    return data.with_labels(np.where(mask, 1 - data.labels, data.labels))


def apply_class_redefinition(data: Dataset, threshold: float) -> Dataset:
    """Relabel class 1 as latent_score >= threshold"""
    if data.latent_score is None:
        raise PreconditionError("class redefinition needs a latent_score")
    return data.with_labels((data.latent_score >= threshold).astype(np.int64))


@dataclass(frozen=True)
class SelectionResult:
    accepted: Dataset
    acceptance_rate: float


def apply_selection_filter(data: Dataset, score_weights: ArrayLike, cutoff: float) -> SelectionResult:
    """Keep rows whose linear score reaches the cutoff (the accepted applicants)"""
    weights = np.asarray(score_weights, dtype=np.float64)
    if weights.shape != (data.n_features,):
        raise PreconditionError(f"score_weights must have length {data.n_features}, got shape {weights.shape}")
    keep = np.flatnonzero(data.features @ weights >= cutoff)
    if keep.size == 0:
        raise DegenerateInputError(f"no rows reach the selection cutoff {cutoff}")
    return SelectionResult(accepted=data.subset(keep), acceptance_rate=keep.size / data.n_rows)


def random_nonnegative_correlation(d: int, rng: np.random.Generator) -> CorrMatrix:
    """Correlation matrix of d variables built from nonnegative loadings"""
    if d < 1:
        raise PreconditionError(f"d must be at least 1, got {d}")
    loadings = rng.uniform(0.0, 1.0, size=(d, d))
    gram = loadings @ loadings.T
    scale = np.sqrt(np.diag(gram))
    corr = np.clip(gram / np.outer(scale, scale), 0.0, 1.0)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return CorrMatrix(corr)


@dataclass(frozen=True, eq=False)
class DriftScenario:
    """A drifting two-class population observed in batches at steps t = 1..steps.

    The latent score is base.direction applied to the features. Selection uses
    selection_weights (default base.direction) and applies to batches
    t <= selection_until, or to all batches when selection_until is None.
    """

    base: GaussianClassSpec
    mean_velocity: Optional[np.ndarray] = None
    drift_mu0: bool = False
    prior_path: Optional[Sequence[float]] = None
    label_noise_delta: float = 0.0
    redefinition_path: Optional[Sequence[float]] = None
    selection_cutoff: Optional[float] = None
    selection_weights: Optional[np.ndarray] = None
    selection_until: Optional[int] = None
    sigma1_end: Optional[np.ndarray] = None
    steps: int = 1
    batch_size: int = 100

    def __post_init__(self):
        p = self.base.p
        velocity = np.zeros(p) if self.mean_velocity is None else _vector(self.mean_velocity)
        if velocity.shape != (p,):
            raise ShapeError(f"mean_velocity must have length {p}")
        object.__setattr__(self, 'mean_velocity', velocity)
        if self.steps < 1:
            raise ConstraintError(f"steps must be at least 1, got {self.steps}")
        if self.batch_size < 1:
            raise ConstraintError(f"batch_size must be at least 1, got {self.batch_size}")
        if not 0.0 <= self.label_noise_delta < 0.5:
            raise ConstraintError(f"label_noise_delta must lie in [0, 0.5), got {self.label_noise_delta}")
        if self.prior_path is not None:
            object.__setattr__(self, 'prior_path', tuple(float(v) for v in self.prior_path))
            if any(not 0.0 < v < 1.0 for v in self.prior_path):
                raise ConstraintError("prior_path values must lie in (0, 1)")
        if self.redefinition_path is not None:
            object.__setattr__(self, 'redefinition_path', tuple(float(v) for v in self.redefinition_path))
        if self.selection_weights is not None:
            weights = _vector(self.selection_weights)
            if weights.shape != (p,):
                raise ShapeError(f"selection_weights must have length {p}")
            object.__setattr__(self, 'selection_weights', weights)
        if self.sigma1_end is not None:
            object.__setattr__(self, 'sigma1_end', _covariance('sigma1_end', self.sigma1_end, p))

    def check_paths(self) -> None:
        for name in ('prior_path', 'redefinition_path'):
            path = getattr(self, name)
            if path is not None and len(path) != self.steps:
                raise ConfigurationError(f"{name} has {len(path)} entries for {self.steps} steps")

    def means_at(self, t: int) -> Tuple[np.ndarray, np.ndarray]:
        shift = t * self.mean_velocity
        mu0 = self.base.mu0 + shift if self.drift_mu0 else self.base.mu0
        return mu0, self.base.mu1 + shift

    def class1_sigma_at(self, t: int) -> np.ndarray:
        start = self.base.class1_sigma
        if self.sigma1_end is None or self.steps == 1:
            return start
        frac = (t - 1) / (self.steps - 1)
        return (1.0 - frac) * start + frac * self.sigma1_end

    def prior_at(self, t: int) -> float:
        return self.base.prior1 if self.prior_path is None else self.prior_path[t - 1]

    def selects_at(self, t: int) -> bool:
        if self.selection_cutoff is None:
            return False
        return self.selection_until is None or t <= self.selection_until


@dataclass(frozen=True)
class Stream:
    batches: Tuple[Dataset, ...]
    acceptance_rates: Tuple[float, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.batches)

    def __iter__(self) -> Iterator[Dataset]:
        return iter(self.batches)

    @property
    def steps(self) -> List[int]:
        return [int(batch.time_index[0]) for batch in self.batches]

    def replay_split(self, design_steps: int) -> Tuple[Dataset, List[Dataset]]:
        """Design set from odd-numbered rows of the first design_steps batches;
        even-numbered rows of every batch for evaluation"""
        if not 1 <= design_steps <= len(self.batches):
            raise PreconditionError(f"design_steps must lie in 1..{len(self.batches)}, got {design_steps}")
        halves = [batch.odd_even_split() for batch in self.batches]
        design = Dataset.concat([odd for odd, _ in halves[:design_steps]])
        return design, [even for _, even in halves]

    def concat(self) -> Dataset:
        return Dataset.concat(list(self.batches))


def make_drift_stream(scenario: DriftScenario, seed: int) -> Stream:
    scenario.check_paths()
    base = scenario.base
    direction = base.direction
    factor0 = sampling_factor(base.sigma)
    weights = direction if scenario.selection_weights is None else scenario.selection_weights

    batches, rates = [], []
    for t in range(1, scenario.steps + 1):
        mu0, mu1 = scenario.means_at(t)
        features, labels = _draw_two_class(
            rng_for(seed, t), scenario.batch_size, scenario.prior_at(t), mu0, mu1,
            factor0, sampling_factor(scenario.class1_sigma_at(t)),
        )
        batch = Dataset(
            features=features,
            labels=labels,
            time_index=np.full(scenario.batch_size, t),
            latent_score=features @ direction,
        )
        if scenario.redefinition_path is not None:
            batch = apply_class_redefinition(batch, scenario.redefinition_path[t - 1])
        if scenario.label_noise_delta > 0.0:
            batch = inject_label_noise(batch, scenario.label_noise_delta, derive_seed(seed, t, NOISE_SUBSTREAM))
        rate = 1.0
        if scenario.selects_at(t):
            selected = apply_selection_filter(batch, weights, scenario.selection_cutoff)
            batch, rate = selected.accepted, selected.acceptance_rate
        batches.append(batch)
        rates.append(rate)

    logger.debug(f"drift stream: {scenario.steps} batches of {scenario.batch_size} rows")
    return Stream(batches=tuple(batches), acceptance_rates=tuple(rates))
