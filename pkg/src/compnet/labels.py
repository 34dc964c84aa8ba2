"""Three-way Top / Middle / Bottom classes from ground-truth scores."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import pandas as pd

from .ingest import GroundTruthTable


class ClassLabel(IntEnum):
    TOP = 0
    MIDDLE = 1
    BOTTOM = 2

    def __str__(self):
        return self.name.capitalize()

    @classmethod
    def parse(cls, text: str) -> "ClassLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown class label {text!r}") from None


CLASS_NAMES = [str(c) for c in ClassLabel]

# slack on the interpolation position so that e.g. 10 * 0.9 lands on index 9
_POS_EPS = 1e-9


@dataclass
class LabelTable:
    actors: list[str]
    scores: np.ndarray
    classes: np.ndarray
    ranks: np.ndarray
    lower_q: float
    upper_q: float
    lower_cut: float
    upper_cut: float

    def counts(self) -> tuple[int, int, int]:
        c = np.bincount(self.classes, minlength=3)
        return int(c[0]), int(c[1]), int(c[2])

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.actors, self.classes.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "actor": self.actors,
            "class": [CLASS_NAMES[c] for c in self.classes],
            "score": self.scores,
            "rank": self.ranks,
        })

    @classmethod
    def from_frame(cls, df: pd.DataFrame, lower_q=math.nan, upper_q=math.nan) -> "LabelTable":
        classes = np.array([ClassLabel.parse(c) for c in df["class"]], dtype=np.int64)
        scores = df["score"].to_numpy(float)
        top = scores[classes == ClassLabel.TOP]
        bottom = scores[classes == ClassLabel.BOTTOM]
        return cls([str(a) for a in df["actor"]], scores, classes,
                   df["rank"].to_numpy(float), lower_q, upper_q,
                   float(bottom.max()) if bottom.size else math.nan,
                   float(top.min()) if top.size else math.nan)


def assign_classes(truth: GroundTruthTable, lower_q: float = 0.10,
                   upper_q: float = 0.90) -> LabelTable:
    """Split actors into Top / Middle / Bottom at the score quantiles.

    Quantiles use linear interpolation between order statistics. An actor is
    Top when its score is at or above the upper quantile and Bottom when at
    or below the lower one; everyone else is Middle. Tied scores always share
    a class. The decision depends only on the order of the scores.
    """
    if not 0 < lower_q < upper_q < 1:
        raise ValueError("quantiles must satisfy 0 < lower_q < upper_q < 1")
    n = len(truth)
    if n < 3:
        raise ValueError(f"need at least 3 actors to label, got {n}")
    actors = truth.actors
    scores = np.array([s for _, s in truth.entries], dtype=float)
    ordered = np.sort(scores)

    hi_idx = min(n - 1, math.ceil((n - 1) * upper_q - _POS_EPS))
    lo_idx = max(0, math.floor((n - 1) * lower_q + _POS_EPS))
    upper_cut, lower_cut = ordered[hi_idx], ordered[lo_idx]

    classes = np.full(n, ClassLabel.MIDDLE, dtype=np.int64)
    classes[scores <= lower_cut] = ClassLabel.BOTTOM
    classes[scores >= upper_cut] = ClassLabel.TOP
    ranks = pd.Series(scores).rank(method="average", ascending=False).to_numpy()
    return LabelTable(actors, scores, classes, ranks, lower_q, upper_q,
                      float(lower_cut), float(upper_cut))
