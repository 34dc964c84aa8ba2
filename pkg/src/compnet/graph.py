"""Dynamic competition network: construction, adjacency scopes and descriptive stats."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .ingest import MatchEvent, natural_key


@dataclass(frozen=True, eq=False)
class DynamicCompetitionNetwork:
    """Fixed actor set plus per-(competition, round) victory edges.

    ``edges[(c, t)]`` is an ``(m, 2)`` int array of ``(winner, loser)`` actor
    indices, one row per event, so parallel victories keep their multiplicity.
    Rounds are dense ``1..k`` per competition; ``round_labels[c][t - 1]`` is the
    round number as it appeared in the source.
    """

    actors: tuple[str, ...]
    competitions: tuple[str, ...]
    rounds_per_competition: dict[str, int]
    edges: dict[tuple[str, int], np.ndarray]
    round_labels: dict[str, tuple[int, ...]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.actors)

    @property
    def n_events(self) -> int:
        return sum(len(e) for e in self.edges.values())

    def index(self, actor: str) -> int:
        return self._index[actor]

    @property
    def _index(self) -> dict[str, int]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {a: i for i, a in enumerate(self.actors)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def scopes(self) -> list[tuple[str, int]]:
        """All (competition, round) pairs in processing order."""
        return [(c, t) for c in self.competitions
                for t in range(1, self.rounds_per_competition[c] + 1)]

    def participants(self, competition: str) -> np.ndarray:
        """Sorted indices of actors with at least one event in ``competition``."""
        k = self.rounds_per_competition[competition]
        parts = [self.edges[(competition, t)].ravel() for t in range(1, k + 1)]
        return np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)


def build_network(events: Sequence[MatchEvent]) -> DynamicCompetitionNetwork:
    """Assemble events into a network; actors indexed by first appearance."""
    if not events:
        raise ValueError("cannot build a network from zero events")
    index: dict[str, int] = {}
    for e in events:
        for a in (e.winner, e.loser):
            if a not in index:
                index[a] = len(index)

    raw_rounds: dict[str, set[int]] = {}
    for e in events:
        raw_rounds.setdefault(e.competition_id, set()).add(e.round)
    competitions = tuple(sorted(raw_rounds, key=natural_key))
    labels = {c: tuple(sorted(raw_rounds[c])) for c in competitions}
    dense = {c: {r: i + 1 for i, r in enumerate(labels[c])} for c in competitions}

    buckets: dict[tuple[str, int], list[tuple[int, int]]] = {
        (c, t): [] for c in competitions for t in range(1, len(labels[c]) + 1)}
    for e in events:
        buckets[(e.competition_id, dense[e.competition_id][e.round])].append(
            (index[e.winner], index[e.loser]))
    edges = {k: np.asarray(v, dtype=np.int64).reshape(-1, 2) for k, v in buckets.items()}
    return DynamicCompetitionNetwork(
        actors=tuple(index),
        competitions=competitions,
        rounds_per_competition={c: len(labels[c]) for c in competitions},
        edges=edges,
        round_labels=labels,
    )


@dataclass(frozen=True)
class Scope:
    """Which events an adjacency matrix counts.

    ``round``: one round of one competition; ``cumulative``: rounds ``1..t``
    of a competition; ``global``: every event.
    """

    kind: str
    competition: str | None = None
    round: int | None = None

    @classmethod
    def single(cls, competition: str, rnd: int) -> "Scope":
        return cls("round", competition, rnd)

    @classmethod
    def cumulative(cls, competition: str, rnd: int) -> "Scope":
        return cls("cumulative", competition, rnd)

    @classmethod
    def all(cls) -> "Scope":
        return cls("global")

    def __str__(self):
        if self.kind == "global":
            return "global"
        return f"{self.kind}({self.competition},{self.round})"


def scope_edges(network: DynamicCompetitionNetwork, scope: Scope) -> np.ndarray:
    if scope.kind == "global":
        parts = list(network.edges.values())
    elif scope.kind in ("round", "cumulative"):
        c, t = scope.competition, scope.round
        if c not in network.rounds_per_competition:
            raise KeyError(f"unknown competition {c!r}")
        k = network.rounds_per_competition[c]
        if t is None or not 1 <= t <= k:
            raise IndexError(f"round {t} out of range 1..{k} for competition {c!r}")
        first = t if scope.kind == "round" else 1
        parts = [network.edges[(c, r)] for r in range(first, t + 1)]
    else:
        raise ValueError(f"unknown scope kind {scope.kind!r}")
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(parts)


def adjacency_from_edges(edges: np.ndarray, n: int) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int64)
    if len(edges):
        np.add.at(A, (edges[:, 0], edges[:, 1]), 1)
    np.fill_diagonal(A, 0)
    return A


def adjacency(network: DynamicCompetitionNetwork, scope: Scope) -> np.ndarray:
    """Weighted adjacency ``A[i, j]`` = victories of actor i over actor j in ``scope``."""
    return adjacency_from_edges(scope_edges(network, scope), network.n)


def second_order_adjacency(A: np.ndarray) -> np.ndarray:
    """``A + A @ A`` with the diagonal cleared (2-cycles are not self-competition)."""
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    sp = csr_matrix(A)
    A2 = A + (sp @ sp).toarray()
    np.fill_diagonal(A2, 0)
    return A2


def simple_digraph(A: np.ndarray) -> np.ndarray:
    """Boolean edge-presence matrix; multiplicities collapse to a single edge."""
    S = np.asarray(A) > 0
    np.fill_diagonal(S, False)
    return S


# ------------------------------------------------------------------ statistics

TABLE_ROWS = [
    ("# Nodes", "nodes"),
    ("# Edges", "edges"),
    ("# Rounds", "rounds"),
    ("# Competitions", "competitions"),
    ("# Labels", "label_counts"),
    ("Connected", "connected"),
    ("# WCC", "wcc_count"),
    ("# SCC", "scc_count"),
    ("Sparsity", "sparsity"),
    ("Diameter", "diameter"),
    ("Runtime", "runtime_seconds"),
]


@dataclass
class GraphStats:
    nodes: int
    edges: int
    rounds: int
    competitions: int
    label_counts: list[int] | None
    connected: bool
    wcc_count: int
    scc_count: int
    sparsity: float
    diameter: int
    runtime_seconds: float | None = None
    distinct_edges: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self, title: str = "Value") -> str:
        cells = []
        for name, key in TABLE_ROWS:
            v = getattr(self, key)
            if v is None:
                s = "-"
            elif key == "label_counts":
                s = "/".join(str(c) for c in v)
            elif key == "connected":
                s = "Yes" if v else "No"
            elif key == "sparsity":
                s = f"{v:.4f}"
            elif key == "runtime_seconds":
                s = f"{v:.2f}s"
            elif isinstance(v, int):
                s = f"{v:,}"
            else:
                s = str(v)
            cells.append((name, s))
        w0 = max(len("Metric"), *(len(n) for n, _ in cells))
        w1 = max(len(title), *(len(s) for _, s in cells))
        lines = [f"{'Metric':<{w0}}  {title:>{w1}}", f"{'-' * w0}  {'-' * w1}"]
        lines += [f"{n:<{w0}}  {s:>{w1}}" for n, s in cells]
        return "\n".join(lines) + "\n"


def directed_diameter(S: np.ndarray) -> int:
    """Longest finite shortest-path length over ordered reachable pairs."""
    n = S.shape[0]
    if n == 0:
        return 0
    D = shortest_path(csr_matrix(S.astype(np.int8)), method="D", directed=True, unweighted=True)
    finite = D[np.isfinite(D)]
    return int(finite.max()) if finite.size else 0


def graph_stats(network: DynamicCompetitionNetwork, labels: Iterable[int] | None = None,
                runtime_seconds: float | None = None) -> GraphStats:
    """Whole-graph descriptives on the global simple digraph.

    ``labels`` are the Top/Middle/Bottom class counts, if known;
    ``runtime_seconds`` is the wall time of a feature pass, if measured.
    """
    S = simple_digraph(adjacency(network, Scope.all()))
    n = network.n
    graph = csr_matrix(S.astype(np.int8))
    wcc, _ = connected_components(graph, directed=True, connection="weak")
    scc, _ = connected_components(graph, directed=True, connection="strong")
    m = int(S.sum())
    return GraphStats(
        nodes=n,
        edges=network.n_events,
        rounds=max(network.rounds_per_competition.values()),
        competitions=len(network.competitions),
        label_counts=list(labels) if labels is not None else None,
        connected=bool(wcc == 1),
        wcc_count=int(wcc),
        scc_count=int(scc),
        sparsity=m / (n * (n - 1)) if n > 1 else 0.0,
        diameter=directed_diameter(S),
        runtime_seconds=runtime_seconds,
        distinct_edges=m,
    )
