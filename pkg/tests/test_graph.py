import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from compnet.graph import (Scope, adjacency, build_network, graph_stats,
                           second_order_adjacency, simple_digraph)
from compnet.ingest import MatchEvent

from oracles import bfs_distances, second_order_brute

DIRECT = [MatchEvent("S1", 1, "u", "w"), MatchEvent("S1", 1, "v", "w")]


def test_direct_network_shape():
    net = build_network(DIRECT)
    assert net.n == 3 and net.competitions == ("S1",)
    assert net.rounds_per_competition == {"S1": 1} and net.n_events == 2


def test_direct_round_adjacency():
    net = build_network(DIRECT)
    A = adjacency(net, Scope.single("S1", 1))
    u, v, w = (net.index(a) for a in "uvw")
    expected = np.zeros((3, 3), dtype=int)
    expected[u, w] = expected[v, w] = 1
    assert np.array_equal(A, expected)


def test_round_gap_renumbered():
    net = build_network([MatchEvent("S1", 1, "a", "b"), MatchEvent("S1", 3, "b", "a")])
    assert net.rounds_per_competition["S1"] == 2
    assert net.round_labels["S1"] == (1, 3)
    A2 = adjacency(net, Scope.single("S1", 2))
    assert A2[net.index("b"), net.index("a")] == 1


def test_multiplicity_counts():
    net = build_network([MatchEvent("S1", 1, "u", "w")] * 2)
    assert adjacency(net, Scope.single("S1", 1))[net.index("u"), net.index("w")] == 2


def test_cumulative_is_sum_of_rounds():
    rng = np.random.default_rng(3)
    names = list("abcdef")
    events = []
    for _ in range(60):
        w, l = rng.choice(names, 2, replace=False)
        events.append(MatchEvent(str(rng.choice(["c1", "c2"])), int(rng.integers(1, 5)), w, l))
    net = build_network(events)
    for c in net.competitions:
        k = net.rounds_per_competition[c]
        total = sum(adjacency(net, Scope.single(c, t)) for t in range(1, k + 1))
        assert np.array_equal(adjacency(net, Scope.cumulative(c, k)), total)
    glob = sum(adjacency(net, Scope.single(c, t)) for c, t in net.scopes())
    assert np.array_equal(adjacency(net, Scope.all()), glob)


def test_one_indirect_second_order():
    # u -> w, v -> z, z -> w
    u, v, w, z = range(4)
    A = np.zeros((4, 4), dtype=np.int64)
    A[u, w] = A[v, z] = A[z, w] = 1
    A2 = second_order_adjacency(A)
    assert A2[v, w] == 1 and A2[v, z] == 1 and A2[u, w] == 1 and A2[z, w] == 1
    assert A2.sum() == 4


def test_second_order_zero_and_two_cycle():
    assert not second_order_adjacency(np.zeros((5, 5), dtype=np.int64)).any()
    A = np.array([[0, 1], [1, 0]])
    assert np.array_equal(second_order_adjacency(A), A)


@settings(max_examples=60, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 7), st.integers(1, 7)).map(lambda s: (s[0], s[0])),
              elements=st.integers(0, 3)))
def test_second_order_matches_path_enumeration(A):
    np.fill_diagonal(A, 0)
    assert np.array_equal(second_order_adjacency(A), second_order_brute(A))


def test_simple_digraph_drops_weights_and_loops():
    A = np.array([[2, 3], [0, 0]])
    assert np.array_equal(simple_digraph(A), np.array([[0, 1], [0, 0]]))


def test_direct_stats():
    s = graph_stats(build_network(DIRECT))
    assert (s.nodes, s.wcc_count, s.scc_count, s.diameter) == (3, 1, 3, 1)
    assert s.edges == 2 and s.connected


def test_stats_diameter_matches_bfs():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = 9
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j and rng.random() < 0.2]
        if not pairs:
            continue
        events = [MatchEvent("c", 1, f"a{i}", f"a{j}") for i, j in pairs]
        net = build_network(events)
        S = simple_digraph(adjacency(net, Scope.all()))
        longest = max(max(bfs_distances(S, s)) for s in range(net.n))
        assert graph_stats(net).diameter == longest


def test_stats_table_rows():
    text = graph_stats(build_network(DIRECT), [1, 1, 1], 0.5).to_table("toy")
    for row in ("# Nodes", "# Edges", "# Rounds", "# Labels", "Connected", "# WCC", "# SCC",
                "Sparsity", "Diameter", "Runtime"):
        assert row in text


def test_empty_events_rejected():
    with pytest.raises(ValueError):
        build_network([])
