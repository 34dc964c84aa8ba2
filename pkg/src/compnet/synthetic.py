"""Synthetic competition data for benchmarks and smoke tests."""
from __future__ import annotations

import numpy as np

from .ingest import GroundTruthTable, MatchEvent
from .labels import ClassLabel
from .learn.dataset import Dataset


def synthetic_tournament(n_actors: int = 933, n_events: int = 16_571, n_rounds: int = 18,
                         seed: int = 0, competition: str = "synthetic"
                         ) -> tuple[list[MatchEvent], GroundTruthTable]:
    """Random-pairing tournament with Bradley-Terry outcomes.

    Every actor gets a latent strength (the returned ground truth). Each
    round draws about ``n_events / n_rounds`` games between random pairs;
    the stronger player wins with logistic probability in the strength gap.
    Every actor plays at least once.
    """
    if n_events < (n_actors + 1) // 2:
        raise ValueError("too few events to involve every actor")
    rng = np.random.default_rng(seed)
    strength = rng.normal(0.0, 1.0, n_actors)
    names = [f"p{i:04d}" for i in range(n_actors)]
    per_round = np.full(n_rounds, n_events // n_rounds)
    per_round[: n_events % n_rounds] += 1

    events = []
    for t, m in enumerate(per_round, start=1):
        pairs = []
        while len(pairs) < m:
            perm = rng.permutation(n_actors)
            pairs.extend(zip(perm[0::2], perm[1::2]))
        for a, b in pairs[:m]:
            p_a = 1.0 / (1.0 + np.exp(strength[b] - strength[a]))
            w, l = (a, b) if rng.random() < p_a else (b, a)
            events.append(MatchEvent(competition, t, names[w], names[l]))
    truth = GroundTruthTable(tuple((names[i], float(strength[i])) for i in range(n_actors)))
    return events, truth


def con_driven_dataset(long, noise: float = 0.10, lower_q: float = 0.10, upper_q: float = 0.90,
                       seed: int = 0, measure: str = "con1", feature_names=None) -> Dataset:
    """Row-level classes that are a noisy function of one CON column.

    Each (actor, round) row is Top / Bottom when its ``measure`` value is at
    or beyond the upper / lower quantile of that column, Middle otherwise;
    then a ``noise`` fraction of rows is relabelled to a different class
    chosen at random.
    """
    if feature_names is None:
        feature_names = [c for c in long.columns if c not in ("actor", "competition", "round")]
    rng = np.random.default_rng(seed)
    values = long[measure].to_numpy(float)
    hi, lo = np.quantile(values, upper_q), np.quantile(values, lower_q)
    y = np.full(values.size, ClassLabel.MIDDLE, dtype=np.int64)
    y[values <= lo] = ClassLabel.BOTTOM
    y[values >= hi] = ClassLabel.TOP
    flip = rng.random(values.size) < noise
    y[flip] = (y[flip] + rng.integers(1, 3, flip.sum())) % 3
    return Dataset(long[list(feature_names)].to_numpy(float), y, long["round"].to_numpy(),
                   long["actor"].to_numpy(object), tuple(feature_names))
