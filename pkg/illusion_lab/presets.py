"""Named Gaussian problems, drift scenarios and the literature survey rows.

tree-lda-crossing: class 1 starts with a wide second coordinate, which a tree
exploits and LDA (whose direction is the mean difference) cannot. The spread
shrinks to that of class 0 over the horizon, so by the end the LDA rule
x1 >= 0.75 is Bayes-optimal (error 1 - Phi(0.75) ~ 0.2266) while the tree
keeps its early splits. Frozen with seed 20240611.
"""
from typing import Callable, Dict, List, Tuple

import numpy as np

from .exceptions import ConfigurationError
from .synthdata import DriftScenario, GaussianClassSpec

CROSSING_SEED = 20240611


def _delta_2(prior1: float = 0.5) -> GaussianClassSpec:
    return GaussianClassSpec(mu0=[0.0, 0.0], mu1=[2.0, 0.0], sigma=np.eye(2), prior1=prior1)


GAUSSIAN_PRESETS: Dict[str, Callable[[], GaussianClassSpec]] = {
    'delta-2': _delta_2,
    'delta-2-imbalanced': lambda: _delta_2(prior1=0.3),
    'delta-2-prior-0.7': lambda: _delta_2(prior1=0.7),
    'no-signal': lambda: GaussianClassSpec(mu0=[0.0, 0.0], mu1=[0.0, 0.0], sigma=np.eye(2), prior1=0.5),
}


def _crossing() -> DriftScenario:
    return DriftScenario(
        base=GaussianClassSpec(
            mu0=[0.0, 0.0],
            mu1=[1.5, 0.0],
            sigma=np.eye(2),
            sigma1=np.diag([1.0, 9.0]),
            prior1=0.5,
        ),
        sigma1_end=np.eye(2),
        steps=50,
        batch_size=1000,
    )


def _concept_drift() -> DriftScenario:
    # latent score is 2 * x1; the class-1 threshold moves from 2 to 3 halfway
    return DriftScenario(
        base=_delta_2(),
        redefinition_path=[2.0] * 25 + [3.0] * 25,
        steps=50,
        batch_size=400,
    )


DRIFT_PRESETS: Dict[str, Callable[[], DriftScenario]] = {
    'stationary': lambda: DriftScenario(base=_delta_2(), steps=50, batch_size=400),
    'mean-drift': lambda: DriftScenario(base=_delta_2(), mean_velocity=[-0.04, 0.0], steps=100, batch_size=400),
    'tree-lda-crossing': _crossing,
    'concept-drift': _concept_drift,
    'reject-inference': lambda: DriftScenario(
        base=_delta_2(), selection_cutoff=1.0, selection_until=5, steps=50, batch_size=400,
    ),
    'noisy-labels': lambda: DriftScenario(base=_delta_2(), label_noise_delta=0.2, steps=50, batch_size=400),
}

# Tree settings the crossing was calibrated with
CROSSING_TREE = {'max_leaves': 8, 'min_leaf': 25}

# (name, default-rule error, simple linear method error, best reported error)
SURVEYS: Dict[str, List[Tuple[str, float, float, float]]] = {
    'literature-survey': [
        ('Segmentation', 0.760, 0.083, 0.0140),
        ('Pima', 0.350, 0.221, 0.1979),
        ('House-votes16', 0.386, 0.046, 0.0270),
        ('Vehicle', 0.750, 0.216, 0.1450),
        ('Satimage', 0.758, 0.160, 0.0850),
        ('Heart Cleveland', 0.560, 0.141, 0.1410),
        ('Splice', 0.475, 0.057, 0.0330),
        ('Waveform21', 0.667, 0.004, 0.0035),
        ('Led7', 0.900, 0.265, 0.2650),
        ('Breast Wisconsin', 0.345, 0.038, 0.0260),
    ],
}


def _lookup(table: Dict, name: str, what: str):
    if name not in table:
        raise ConfigurationError(f"unknown {what} '{name}', expected one of {sorted(table)}")
    return table[name]


def gaussian_preset(name: str) -> GaussianClassSpec:
    return _lookup(GAUSSIAN_PRESETS, name, 'Gaussian preset')()


def drift_preset(name: str) -> DriftScenario:
    return _lookup(DRIFT_PRESETS, name, 'drift scenario')()


def survey_rows(name: str) -> List[Tuple[str, float, float, float]]:
    return list(_lookup(SURVEYS, name, 'survey'))
