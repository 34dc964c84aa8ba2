from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..features import KEY_COLUMNS


@dataclass
class Dataset:
    """Labelled feature rows; ``rounds[i]`` is the time step of row i."""

    X: np.ndarray
    y: np.ndarray
    rounds: np.ndarray
    actors: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-D")
        self.y = np.asarray(self.y, dtype=np.int64)
        self.rounds = np.asarray(self.rounds, dtype=np.int64)
        self.actors = np.asarray(self.actors, dtype=object)
        if not (len(self.X) == len(self.y) == len(self.rounds) == len(self.actors)):
            raise ValueError("dataset columns have different lengths")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names does not match X")

    def __len__(self):
        return len(self.y)

    def subset(self, mask) -> "Dataset":
        return Dataset(self.X[mask], self.y[mask], self.rounds[mask], self.actors[mask],
                       self.feature_names)


def make_dataset(long: pd.DataFrame, labels: dict[str, int], measures=None) -> Dataset:
    """Join long-form (actor, round) feature rows with each actor's class.

    Rows of unlabelled actors are dropped.
    """
    if measures is None:
        measures = [c for c in long.columns if c not in KEY_COLUMNS]
    keep = long["actor"].map(lambda a: a in labels).to_numpy(bool)
    rows = long[keep]
    return Dataset(
        X=rows[list(measures)].to_numpy(float),
        y=np.array([labels[a] for a in rows["actor"]], dtype=np.int64),
        rounds=rows["round"].to_numpy(np.int64),
        actors=rows["actor"].to_numpy(object),
        feature_names=tuple(measures),
    )


def make_wide_dataset(wide: pd.DataFrame, labels: dict[str, int]) -> Dataset:
    """Actor-level rows from a wide matrix; used for per-time-step importances."""
    rows = wide[[a in labels for a in wide.index]]
    return Dataset(
        X=rows.to_numpy(float),
        y=np.array([labels[a] for a in rows.index], dtype=np.int64),
        rounds=np.zeros(len(rows), dtype=np.int64),
        actors=rows.index.to_numpy(object),
        feature_names=tuple(rows.columns),
    )


def temporal_split(data: Dataset, train_fraction: float = 0.8) -> tuple[Dataset, Dataset]:
    """Train on the first ``ceil(train_fraction * k)`` distinct rounds (capped at k - 1), test on the rest."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    rounds = np.unique(data.rounds)
    if rounds.size < 2:
        raise ValueError("temporal split needs at least two distinct rounds")
    # at least one round on each side, so short logs still get a test set
    n_train = min(max(math.ceil(train_fraction * rounds.size - 1e-9), 1), rounds.size - 1)
    last_train = rounds[n_train - 1]
    mask = data.rounds <= last_train
    return data.subset(mask), data.subset(~mask)
