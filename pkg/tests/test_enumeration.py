import pytest

from oracles import isomorphic_brute
from homlab.enumeration import canonical_graph, canonical_key, connected_graphs, graphs_up_to_iso
from homlab.graph import Graph
from homlab.treedec import treewidth

# OEIS A000088 and A001349
ALL = [1, 2, 4, 11, 34, 156]
CONNECTED = [1, 1, 2, 6, 21, 112]


@pytest.mark.parametrize("n", range(1, 7))
def test_graph_counts(n):
    assert len(graphs_up_to_iso(n)) == ALL[n - 1]
    assert sum(1 for g in graphs_up_to_iso(n) if g.is_connected()) == CONNECTED[n - 1]


def test_planar_counts():
    assert [len(graphs_up_to_iso(n, "planar")) for n in range(1, 7)] == [1, 2, 4, 11, 33, 142]


def test_treewidth_family():
    gs = graphs_up_to_iso(5, "tw", 1)
    assert gs and all(treewidth(g) <= 1 for g in gs)
    # forests on 5 vertices
    assert len(gs) == 10
    with pytest.raises(ValueError):
        graphs_up_to_iso(3, "tw")


def test_unknown_family():
    with pytest.raises(ValueError):
        graphs_up_to_iso(3, "bipartite-ish")


def test_pairwise_non_isomorphic():
    gs = graphs_up_to_iso(5)
    for i, g in enumerate(gs):
        for h in gs[i + 1:]:
            if g.m == h.m:
                assert not isomorphic_brute(g, h)


def test_connected_order_is_deterministic():
    first = list(connected_graphs(4))
    assert first == list(connected_graphs(4))
    assert [g.n for g in first] == sorted(g.n for g in first)
    assert all(g.is_connected() for g in first)


def test_canonical_graph_is_class_invariant():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    h = Graph.from_edges(4, [(2, 0), (0, 3), (3, 1)])
    assert canonical_key(g) == canonical_key(h)
    assert canonical_graph(g) == canonical_graph(h)
