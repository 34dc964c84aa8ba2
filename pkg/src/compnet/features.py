"""Node Ranking Model loop: centrality features for every (competition, round)."""
from __future__ import annotations

import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .centrality import MEASURES, compute_measures
from .graph import DynamicCompetitionNetwork, Scope, adjacency_from_edges, scope_edges

SCOPE_MODES = ("per_round", "cumulative")
KEY_COLUMNS = ["actor", "competition", "round"]
WIDE_COLUMN = re.compile(r"^(?P<measure>.+)_t(?P<round>\d+)$")


@dataclass
class FeatureMatrix:
    """Long-form features: one row per (actor, competition, round).

    Columns are ``actor, competition, round`` followed by the measures in
    the fixed order of :data:`compnet.centrality.MEASURES`. Rounds in which
    an actor did not compete hold 0.
    """

    long: pd.DataFrame
    measures: tuple[str, ...]
    scope_mode: str = "per_round"
    runtime_seconds: float | None = None

    def wide(self) -> pd.DataFrame:
        return to_wide(self.long, self.measures)


def _scope_features(network, c, t, measures, scope_mode, damping):
    scope = Scope.single(c, t) if scope_mode == "per_round" else Scope.cumulative(c, t)
    edges = scope_edges(network, scope)
    active = np.unique(edges.ravel())
    if active.size == 0:
        return active, {m: np.zeros(0) for m in measures}
    # restrict to the actors present in this scope; absent actors score 0
    local = np.searchsorted(active, edges)
    A = adjacency_from_edges(local, active.size)
    vecs = compute_measures(A, measures, str(scope), damping=damping)
    return active, {m: v.values for m, v in vecs.items()}


def _scope_job(args):
    return _scope_features(*args)


def run_nrm(network: DynamicCompetitionNetwork, measures=MEASURES,
            scope_mode: str = "per_round", *, damping: float = 0.85,
            n_jobs: int = 1) -> FeatureMatrix:
    """Compute every requested measure for each (competition, round) scope.

    Each scope's graph contains only the actors with an event in it, so
    reverse PageRank is normalised over the actors who actually played.
    ``scope_mode="cumulative"`` uses rounds ``1..t`` instead of round ``t``.
    Output is identical for any ``n_jobs``.
    """
    measures = tuple(measures)
    if not measures:
        raise ValueError("at least one measure is required")
    unknown = [m for m in measures if m not in MEASURES]
    if unknown:
        raise ValueError(f"unknown measures {unknown}; choose from {MEASURES}")
    if scope_mode not in SCOPE_MODES:
        raise ValueError(f"scope_mode must be one of {SCOPE_MODES}")
    measures = tuple(m for m in MEASURES if m in measures)

    start = time.perf_counter()
    scopes = network.scopes()
    jobs = [(network, c, t, measures, scope_mode, damping) for c, t in scopes]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_scope_job, jobs))
    else:
        results = [_scope_job(j) for j in jobs]

    frames = []
    by_scope = dict(zip(scopes, results))
    actors = np.asarray(network.actors, dtype=object)
    for c in network.competitions:
        members = network.participants(c)
        for t in range(1, network.rounds_per_competition[c] + 1):
            active, values = by_scope[(c, t)]
            pos = np.searchsorted(members, active)
            block = {"actor": actors[members], "competition": c, "round": t}
            for m in measures:
                col = np.zeros(members.size, dtype=float)
                col[pos] = values[m]
                block[m] = col
            frames.append(pd.DataFrame(block))
    long = pd.concat(frames, ignore_index=True)
    for m in ("con1", "con2", "in_degree", "out_degree"):
        if m in long:
            long[m] = long[m].astype(np.int64)
    return FeatureMatrix(long, measures, scope_mode, time.perf_counter() - start)


def to_wide(long: pd.DataFrame, measures=None) -> pd.DataFrame:
    """Pivot long-form features to one row per actor with ``{measure}_t{round}`` columns.

    Rounds are aligned by index across competitions; an actor in several
    competitions gets the sum of its values for a shared round index.
    Missing cells are 0.
    """
    if measures is None:
        measures = [c for c in long.columns if c not in KEY_COLUMNS]
    actor_order = pd.unique(long["actor"])
    rounds = sorted(long["round"].unique())
    grouped = long.groupby(["actor", "round"], sort=False)[list(measures)].sum()
    wide = grouped.unstack("round", fill_value=0)
    wide = wide.reindex(index=actor_order, fill_value=0)
    cols = [(m, r) for m in measures for r in rounds]
    wide = wide.reindex(columns=pd.MultiIndex.from_tuples(cols), fill_value=0)
    wide.columns = [f"{m}_t{r}" for m, r in cols]
    wide.index.name = "actor"
    return wide


def from_wide(wide: pd.DataFrame) -> pd.DataFrame:
    """Melt a wide matrix back to ``actor, round, <measure>...`` (inverse of :func:`to_wide`)."""
    parsed = [WIDE_COLUMN.match(c) for c in wide.columns]
    if not all(parsed):
        bad = [c for c, p in zip(wide.columns, parsed) if not p]
        raise ValueError(f"columns not of the form measure_tN: {bad}")
    records = {}
    for col, p in zip(wide.columns, parsed):
        m, r = p["measure"], int(p["round"])
        for actor, value in wide[col].items():
            records.setdefault((actor, r), {})[m] = value
    out = pd.DataFrame([{"actor": a, "round": r, **vals} for (a, r), vals in records.items()])
    return out.sort_values(["actor", "round"], kind="stable").reset_index(drop=True)


def unity_normalize(values) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant vector maps to zeros."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot normalize an empty vector")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def moving_average(values, window: int = 50) -> np.ndarray:
    """Trailing mean over the last ``window`` points (fewer at the start)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(values, dtype=float)
    if x.size == 0 or window == 1:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(0, idx - window)
    # clip guards the cumulative-sum rounding at the window edges
    return np.clip((csum[idx] - csum[lo]) / (idx - lo), x.min(), x.max())
