"""Closed-form results: equicorrelated variance reduction, flat-maximum bounds, label-noise odds"""
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from .config import Config
from .exceptions import (
    ConstraintError,
    DegenerateInputError,
    PreconditionError,
    ValidityError,
)

logger = logging.getLogger(__name__)

Number = Union[float, np.ndarray]


def _check_rho(d: int, rho: float) -> None:
    if not rho < 1.0:
        raise ConstraintError(f"rho must be < 1, got {rho}")
    if d > 1:
        lower = -1.0 / (d - 1)
        if not rho > lower:
            raise ConstraintError(
                f"rho must exceed -(d-1)^-1 = {lower:.6g} for d = {d}, got {rho}"
            )
        if rho < 0.0:
            raise ConstraintError(f"rho must be nonnegative, got {rho}")


@dataclass(frozen=True)
class EquicorrSpec:
    """Predictors pairwise correlated rho, each correlated tau with the response.

    For d = 1 rho is accepted (any value below 1) and plays no role.
    """

    d: int
    rho: float
    tau: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConstraintError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, 'd', int(self.d))
        _check_rho(self.d, self.rho)
        if not 0.0 <= self.tau <= 1.0:
            raise ConstraintError(f"tau must lie in [0, 1], got {self.tau}")
        smallest = float(np.linalg.eigvalsh(_full_sigma(self.d, self.rho, self.tau))[0])
        if smallest < -Config.PSD_TOLERANCE:
            raise ValidityError(
                f"correlation matrix for (d={self.d}, rho={self.rho}, tau={self.tau}) "
                f"is not positive semidefinite: smallest eigenvalue {smallest:.6g} is negative"
            )

    def at(self, d: int) -> "EquicorrSpec":
        return EquicorrSpec(d=d, rho=self.rho, tau=self.tau)


def _full_sigma(d: int, rho: float, tau: float) -> np.ndarray:
    sigma = np.full((d + 1, d + 1), float(rho))
    sigma[:d, d] = tau
    sigma[d, :d] = tau
    np.fill_diagonal(sigma, 1.0)
    return sigma


def build_equicorr_sigma(spec: EquicorrSpec) -> np.ndarray:
    """Full (d+1)x(d+1) correlation matrix of (x, y); the response is last"""
    return _full_sigma(spec.d, spec.rho, spec.tau)


def conditional_variance(spec: EquicorrSpec) -> float:
    """V(d) from the closed-form inverse of the equicorrelated block"""
    d, rho, tau = spec.d, spec.rho, spec.tau
    t2 = tau * tau
    return 1.0 - d * t2 / (1.0 - rho) + rho * d * d * t2 / ((1.0 + (d - 1) * rho) * (1.0 - rho))


def simplified_conditional_variance(spec: EquicorrSpec) -> float:
    """V(d) = 1 - d tau^2 / (1 + (d-1) rho)"""
    return 1.0 - spec.d * spec.tau ** 2 / (1.0 + (spec.d - 1) * spec.rho)


def direct_conditional_variance(spec: EquicorrSpec) -> float:
    """Sigma22 - Sigma21 Sigma11^-1 Sigma12 by Cholesky solve"""
    sigma = build_equicorr_sigma(spec)
    d = spec.d
    s11 = sigma[:d, :d]
    s12 = sigma[:d, d]
    try:
        factor = linalg.cho_factor(s11, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise ValidityError(f"predictor block is not positive definite: {e}") from e
    return float(sigma[d, d] - s12 @ linalg.cho_solve(factor, s12, check_finite=False))


def variance_reduction(spec: EquicorrSpec) -> float:
    """X(d+1) = V(d) - V(d+1), in the explicit difference form"""
    d, rho, tau = spec.d, spec.rho, spec.tau
    _check_rho(d + 1, rho)
    t2 = tau * tau
    bracket = d * d / (1.0 + (d - 1) * rho) - (d + 1) ** 2 / (1.0 + d * rho)
    return t2 / (1.0 - rho) + rho * t2 / (1.0 - rho) * bracket


def variance_limit(spec: EquicorrSpec) -> float:
    """Limit of V(d) as d grows without bound (requires rho > 0)"""
    if spec.rho <= 0.0:
        raise PreconditionError("the limit exists only for rho > 0; with rho = 0 V reaches 0 at d = tau^-2")
    return 1.0 - spec.tau ** 2 / spec.rho


def max_predictors(tau: float) -> int:
    """Largest d for which uncorrelated predictors keep V(d) >= 0"""
    if not 0.0 < tau <= 1.0:
        raise PreconditionError(f"tau must lie in (0, 1], got {tau}")
    return int(math.floor(1.0 / (tau * tau) + 1e-12))


@dataclass(frozen=True, eq=False)
class CorrMatrix:
    """Symmetric correlation matrix with unit diagonal"""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise PreconditionError(f"correlation matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=Config.SYMMETRY_TOLERANCE):
            raise PreconditionError("correlation matrix must be symmetric")
        if not np.all(np.diag(m) == 1.0):
            raise PreconditionError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(m) > 1.0):
            raise PreconditionError("correlations must lie in [-1, 1]")
        m.setflags(write=False)
        object.__setattr__(self, 'entries', m)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def equicorrelated(cls, d: int, rho: float) -> "CorrMatrix":
        entries = np.full((d, d), float(rho))
        np.fill_diagonal(entries, 1.0)
        return cls(entries)


@dataclass(frozen=True)
class FlatMaximumBound:
    """Lower bounds on r(v_equal, w) for nonnegative normalized w.

    `row_minimum_mean` ends the displayed inequality chain and is the tested
    guarantee; `smallest_row_average` is the verbal form of the same claim.
    """

    row_minimum_mean: float
    smallest_row_average: float


def flat_maximum_bound(corr: CorrMatrix) -> FlatMaximumBound:
    r = corr.entries
    if np.any(r < 0.0):
        raise PreconditionError("the flat-maximum bound needs nonnegative correlations")
    return FlatMaximumBound(
        row_minimum_mean=float(np.mean(r.min(axis=1))),
        smallest_row_average=float(np.min(r.mean(axis=1))),
    )


def _check_weights(name: str, weights: np.ndarray, d: int) -> None:
    if weights.shape != (d,):
        raise PreconditionError(f"{name} must have length {d}, got shape {weights.shape}")
    if np.any(weights < 0.0):
        raise PreconditionError(f"{name} must be nonnegative")
    if abs(weights.sum() - 1.0) > Config.WEIGHT_SUM_TOLERANCE:
        raise PreconditionError(f"{name} must sum to 1, got {weights.sum():.12g}")


def weighted_sum_correlation(corr: CorrMatrix, w: ArrayLike, v: ArrayLike) -> float:
    """Correlation between sum_i w_i x_i and sum_i v_i x_i"""
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _check_weights('w', w, corr.d)
    _check_weights('v', v, corr.d)
    r = corr.entries
    var_w = float(w @ r @ w)
    var_v = float(v @ r @ v)
    if var_w <= 0.0 or var_v <= 0.0:
        raise DegenerateInputError("a weighted sum has zero variance")
    value = float(w @ r @ v) / math.sqrt(var_w * var_v)
    return min(1.0, max(-1.0, value))


@dataclass(frozen=True)
class FlatMaximumCheck:
    """Monte Carlo comparison of equal weights against random weight vectors"""

    draws: int
    min_correlation: float
    violations: int


def flat_maximum_monte_carlo(corr: CorrMatrix, draws: int, rng: np.random.Generator) -> FlatMaximumCheck:
    """Correlate equal weights with `draws` Dirichlet(1, ..., 1) weight vectors"""
    if draws < 1:
        raise PreconditionError("need at least one draw")
    bound = flat_maximum_bound(corr).row_minimum_mean
    r = corr.entries
    d = corr.d
    v = np.full(d, 1.0 / d)
    weights = rng.dirichlet(np.ones(d), size=draws)
    rv = r @ v
    cov_wv = weights @ rv
    var_w = np.einsum('ij,jk,ik->i', weights, r, weights)
    var_v = float(v @ rv)
    if var_v <= 0.0 or np.any(var_w <= 0.0):
        raise DegenerateInputError("a weighted sum has zero variance")
    correlations = np.clip(cov_wv / np.sqrt(var_w * var_v), -1.0, 1.0)
    violations = int(np.sum(correlations < bound - Config.PSD_TOLERANCE))
    if violations:
        logger.debug(f"flat-maximum bound {bound:.6g} violated {violations} times")
    return FlatMaximumCheck(draws=draws, min_correlation=float(correlations.min()), violations=violations)


@dataclass(frozen=True)
class NoiseModel:
    """Each class loses a proportion delta of its labels to the other class"""

    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta < 0.5:
            raise ConstraintError(f"delta must lie in [0, 0.5), got {self.delta}")

    @property
    def epsilon(self) -> float:
        return self.delta / (1.0 - self.delta)


def _as_output(value: np.ndarray, like) -> Number:
    return float(value) if np.ndim(like) == 0 else value


def noisy_odds(r: ArrayLike, noise: NoiseModel) -> Number:
    """Apparent odds r* = (r + eps) / (eps r + 1)"""
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0.0):
        raise PreconditionError("odds must be nonnegative")
    eps = noise.epsilon
    return _as_output((arr + eps) / (eps * arr + 1.0), r)


def clean_odds(r_star: ArrayLike, noise: NoiseModel) -> Number:
    """Invert noisy_odds: r = (r* - eps) / (1 - eps r*), valid while eps r* < 1"""
    arr = np.asarray(r_star, dtype=np.float64)
    eps = noise.epsilon
    if np.any(eps * arr >= 1.0):
        raise PreconditionError("apparent odds outside the invertible range eps * r* < 1")
    return _as_output((arr - eps) / (1.0 - eps * arr), r_star)


def corrected_threshold(k: float, noise: NoiseModel) -> float:
    """Threshold k* on apparent odds matching threshold k on true odds"""
    if not k > 0.0:
        raise PreconditionError(f"threshold odds must be positive, got {k}")
    eps = noise.epsilon
    return (k + eps) / (eps * k + 1.0)


def noisy_posterior(p1: ArrayLike, noise: NoiseModel) -> Number:
    """Apparent class-1 posterior (1 - delta) p + delta (1 - p)"""
    arr = np.asarray(p1, dtype=np.float64)
    if np.any((arr < 0.0) | (arr > 1.0)):
        raise PreconditionError("posterior probabilities must lie in [0, 1]")
    return _as_output((1.0 - noise.delta) * arr + noise.delta * (1.0 - arr), p1)
