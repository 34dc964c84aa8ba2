"""Per-node centrality measures on a weighted adjacency matrix.

All functions take a dense square matrix. CON and degree use the weights
(victory multiplicities); closeness, betweenness and reverse PageRank use
only edge presence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .graph import second_order_adjacency, simple_digraph

logger = logging.getLogger(__name__)

MEASURES = ("con1", "con2", "closeness", "betweenness", "pagerank_rev", "in_degree", "out_degree")


@dataclass
class CentralityVector:
    measure: str
    values: np.ndarray
    scope: str | None = None
    converged: bool = True
    iterations: int | None = None
    residual: float | None = None

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def con_pair(A, u: int, v: int) -> int:
    """Shared defeated opponents of u and v: ``sum_x min(A[u, x], A[v, x])``."""
    if u == v:
        raise ValueError("con_pair needs two distinct actors")
    A = _square(A)
    return int(np.minimum(A[u], A[v]).sum())


def _con_min_sum(A: np.ndarray) -> np.ndarray:
    # CON(v) = sum_x [ sum_u min(A[v,x], A[u,x]) - A[v,x] ]; the inner sum over u
    # is a prefix-sum lookup on the sorted column.
    n = A.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for x in np.flatnonzero(A.any(axis=0)):
        col = A[:, x]
        srt = np.sort(col)
        prefix = np.concatenate(([0], np.cumsum(srt)))
        below = np.searchsorted(srt, col, side="left")
        out += prefix[below] + col * (n - below) - col
    return out


def con_scores(A, order: int = 1, scope: str | None = None) -> CentralityVector:
    """First- or second-order CON score of every node.

    Order 2 evaluates the same min-sum on ``A + A @ A`` (diagonal cleared).
    """
    A = _square(A).astype(np.int64)
    if order == 1:
        M = A.copy()
        np.fill_diagonal(M, 0)
    elif order == 2:
        M = second_order_adjacency(A)
    else:
        raise ValueError(f"CON order must be 1 or 2, got {order}")
    return CentralityVector(f"con{order}", _con_min_sum(M), scope)


def closeness(S, scope: str | None = None) -> CentralityVector:
    """Reciprocal of the summed out-distances to reachable nodes; 0 if none reachable."""
    S = simple_digraph(_square(S))
    n = S.shape[0]
    values = np.zeros(n)
    if n and S.any():
        D = shortest_path(csr_matrix(S.astype(np.int8)), method="D", directed=True, unweighted=True)
        D[~np.isfinite(D)] = 0.0
        totals = D.sum(axis=1)
        reach = totals > 0
        values[reach] = 1.0 / totals[reach]
    return CentralityVector("closeness", values, scope)


def betweenness(S, scope: str | None = None) -> CentralityVector:
    """Unnormalized directed betweenness via Brandes dependency accumulation.

    All sources are processed together, one BFS level at a time: column s of
    the working matrices belongs to source s. Path counts and dependencies
    advance by sparse-times-dense products, with the same recurrences as the
    per-source algorithm.
    """
    S = simple_digraph(_square(S))
    n = S.shape[0]
    if n == 0 or not S.any():
        return CentralityVector("betweenness", np.zeros(n), scope)
    fwd = csr_matrix(S.T.astype(float))   # (fwd @ F)[w, s] = sum_v S[v, w] F[v, s]
    back = csr_matrix(S.astype(float))    # (back @ C)[v, s] = sum_w S[v, w] C[w, s]

    dist = np.full((n, n), -1, dtype=np.int32)
    np.fill_diagonal(dist, 0)
    sigma = np.eye(n)
    frontier = np.eye(n)
    depth = 0
    while True:
        reach = fwd @ frontier
        new = (reach > 0) & (dist < 0)
        if not new.any():
            break
        depth += 1
        dist[new] = depth
        sigma[new] = reach[new]
        frontier = np.where(new, sigma, 0.0)

    delta = np.zeros((n, n))
    for level in range(depth - 1, 0, -1):
        below = dist == level + 1
        coeff = np.zeros((n, n))
        coeff[below] = (1.0 + delta[below]) / sigma[below]
        here = dist == level
        delta[here] = (sigma * (back @ coeff))[here]
    return CentralityVector("betweenness", delta.sum(axis=1), scope)


def reverse_pagerank(S, damping: float = 0.85, tol: float = 1e-9, max_iter: int = 200,
                     scope: str | None = None) -> CentralityVector:
    """PageRank on the edge-reversed simple digraph, so rank flows loser -> winner.

    Uniform teleport; dangling nodes (actors who never lost) spread their
    mass uniformly. Stops when the L1 change drops below ``tol``. If
    ``max_iter`` is reached first the last iterate is returned with
    ``converged=False``.
    """
    if not 0 < damping < 1:
        raise ValueError("damping must lie in (0, 1)")
    S = simple_digraph(_square(S)).astype(float)
    n = S.shape[0]
    if n == 0:
        return CentralityVector("pagerank_rev", np.zeros(0), scope)
    # reversed out-degree of j = number of distinct actors who beat j
    out_rev = S.sum(axis=0)
    dangling = out_rev == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / out_rev[~dangling]
    graph = csr_matrix(S)
    x = np.full(n, 1.0 / n)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        new = damping * (graph @ (x * inv))
        new += (damping * x[dangling].sum() + (1.0 - damping)) / n
        residual = float(np.abs(new - x).sum())
        x = new
        if residual < tol:
            break
    converged = residual < tol
    if not converged:
        logger.warning("reverse PageRank did not converge: %d iterations, residual %.3g",
                       it, residual)
    x = x / x.sum()
    return CentralityVector("pagerank_rev", x, scope, converged, it, residual)


def degrees(A, scope: str | None = None) -> tuple[CentralityVector, CentralityVector]:
    """Weighted (multiplicity-counted) in- and out-degree."""
    A = _square(A).astype(np.int64).copy()
    np.fill_diagonal(A, 0)
    return (CentralityVector("in_degree", A.sum(axis=0), scope),
            CentralityVector("out_degree", A.sum(axis=1), scope))


def compute_measures(A, measures=MEASURES, scope: str | None = None, *,
                     damping: float = 0.85) -> dict[str, CentralityVector]:
    """Evaluate several measures on one adjacency, sharing intermediate work."""
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures {sorted(unknown)}; choose from {MEASURES}")
    out: dict[str, CentralityVector] = {}
    for m in measures:
        if m == "con1":
            out[m] = con_scores(A, 1, scope)
        elif m == "con2":
            out[m] = con_scores(A, 2, scope)
        elif m == "closeness":
            out[m] = closeness(A, scope)
        elif m == "betweenness":
            out[m] = betweenness(A, scope)
        elif m == "pagerank_rev":
            out[m] = reverse_pagerank(A, damping=damping, scope=scope)
        elif m in ("in_degree", "out_degree"):
            if m not in out:
                ind, outd = degrees(A, scope)
                out["in_degree"], out["out_degree"] = ind, outd
    return {m: out[m] for m in measures}
