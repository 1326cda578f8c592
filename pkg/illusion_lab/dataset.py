"""Dataset container shared by generators, classifiers and the harness"""
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import PreconditionError, ShapeError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with binary labels.

    `time_index` is the nondecreasing step each row was drawn at and
    `latent_score` the continuum class labels may be thresholded from.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...] = ()
    time_index: Optional[np.ndarray] = None
    latent_score: Optional[np.ndarray] = None
    class_names: Optional[Tuple[str, str]] = field(default=None)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise ShapeError(f"features must be a 2-D matrix, got {features.ndim} dimensions")
        n, p = features.shape
        if n < 1 or p < 1:
            raise PreconditionError(f"dataset needs n >= 1 and p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(features)):
            raise PreconditionError("features contain missing or non-finite values")

        labels = np.asarray(self.labels)
        if labels.shape != (n,):
            raise ShapeError(f"labels must have length {n}, got shape {labels.shape}")
        if not np.all((labels == 0) | (labels == 1)):
            raise PreconditionError("labels must be class ids in {0, 1}")
        labels = labels.astype(np.int64)

        names = tuple(self.feature_names) if self.feature_names else tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise ShapeError(f"expected {p} feature names, got {len(names)}")

        time_index = self.time_index
        if time_index is not None:
            time_index = np.asarray(time_index, dtype=np.int64)
            if time_index.shape != (n,):
                raise ShapeError(f"time_index must have length {n}")
            if n > 1 and np.any(np.diff(time_index) < 0):
                raise PreconditionError("time_index must be nondecreasing")
            time_index = _frozen(time_index)

        latent = self.latent_score
        if latent is not None:
            latent = np.asarray(latent, dtype=np.float64)
            if latent.shape != (n,):
                raise ShapeError(f"latent_score must have length {n}")
            latent = _frozen(latent)

        object.__setattr__(self, 'features', _frozen(features))
        object.__setattr__(self, 'labels', _frozen(labels))
        object.__setattr__(self, 'feature_names', names)
        object.__setattr__(self, 'time_index', time_index)
        object.__setattr__(self, 'latent_score', latent)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> Tuple[int, int]:
        n1 = int(self.labels.sum())
        return self.n_rows - n1, n1

    def class1_fraction(self) -> float:
        return float(self.labels.mean())

    def has_both_classes(self) -> bool:
        n0, n1 = self.class_counts()
        return n0 > 0 and n1 > 0

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Rows at `indices`, in the given order"""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise PreconditionError("subset would be empty")
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            feature_names=self.feature_names,
            time_index=None if self.time_index is None else self.time_index[idx],
            latent_score=None if self.latent_score is None else self.latent_score[idx],
            class_names=self.class_names,
        )

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return replace(self, labels=labels)

    def odd_even_split(self) -> Tuple["Dataset", "Dataset"]:
        """Split into odd-numbered rows (1, 3, 5, ...) and even-numbered rows (2, 4, ...)"""
        idx = np.arange(self.n_rows)
        odd = idx[0::2]
        even = idx[1::2]
        return self.subset(odd), self.subset(even)

    def random_halves(self, rng: np.random.Generator) -> Tuple["Dataset", "Dataset"]:
        """Random half/half split; the first half gets the extra row when n is odd"""
        if self.n_rows < 2:
            raise PreconditionError("need at least 2 rows to split")
        perm = rng.permutation(self.n_rows)
        cut = (self.n_rows + 1) // 2
        return self.subset(np.sort(perm[:cut])), self.subset(np.sort(perm[cut:]))

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise PreconditionError("nothing to concatenate")
        first = parts[0]
        has_time = all(p.time_index is not None for p in parts)
        has_latent = all(p.latent_score is not None for p in parts)
        return cls(
            features=np.vstack([p.features for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
            feature_names=first.feature_names,
            time_index=np.concatenate([p.time_index for p in parts]) if has_time else None,
            latent_score=np.concatenate([p.latent_score for p in parts]) if has_latent else None,
            class_names=first.class_names,
        )
