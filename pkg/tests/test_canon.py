import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs, relabelled
from oracles import automorphism_count, isomorphic_brute
from homlab.canon import (SearchCapExceeded, Structure, canonical_form, canonical_search, compose,
                          find_isomorphism, group_closure, is_isomorphism, orbits, perm_order, perm_power)
from homlab.graph import Graph


def aut_size(g):
    res = canonical_search(Structure.from_graph(g))
    return len(group_closure(res.generators, g.n))


@given(graphs(1, 7), st.randoms(use_true_random=False))
def test_certificate_invariant_under_relabelling(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = relabelled(g, perm)
    assert canonical_form(Structure.from_graph(g))[0] == canonical_form(Structure.from_graph(h))[0]


@given(graphs(1, 6), graphs(1, 6))
def test_certificate_decides_isomorphism(g, h):
    same = canonical_form(Structure.from_graph(g))[0] == canonical_form(Structure.from_graph(h))[0]
    assert same == isomorphic_brute(g, h)


@given(graphs(1, 6), graphs(1, 6))
def test_find_isomorphism_is_verified(g, h):
    a, b = Structure.from_graph(g), Structure.from_graph(h)
    perm = find_isomorphism(a, b)
    if perm is None:
        assert not isomorphic_brute(g, h)
    else:
        assert is_isomorphism(a, b, perm)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_cycle_automorphism_group_is_dihedral(n):
    assert aut_size(Graph.cycle(n)) == 2 * n


def test_small_groups():
    assert aut_size(Graph.complete(3)) == 6
    assert aut_size(Graph.path(3)) == 2
    assert aut_size(Graph.empty(4)) == 24


@given(graphs(1, 6))
def test_automorphism_count_matches_brute_force(g):
    assert aut_size(g) == automorphism_count(g)


def test_rigid_graph():
    # smallest asymmetric graphs have 6 vertices
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (3, 5)])
    assert automorphism_count(g) == 1
    assert aut_size(g) == 1


def test_colours_restrict_isomorphism():
    g = Graph.path(3)
    a = Structure.from_graph(g, [0, 1, 0])
    b = Structure.from_graph(g, [1, 0, 0])
    assert find_isomorphism(a, b) is None
    assert find_isomorphism(a, Structure.from_graph(g, [0, 1, 0])) is not None


def test_node_cap():
    with pytest.raises(SearchCapExceeded):
        canonical_search(Structure.from_graph(Graph.empty(8)), max_nodes=3)


def test_permutation_helpers():
    p = (1, 2, 0, 4, 3)
    assert perm_order(p) == 6
    assert perm_power(p, 6) == tuple(range(5))
    assert compose(p, perm_power(p, 5)) == tuple(range(5))
    assert sorted(map(sorted, orbits([p], 5))) == [[0, 1, 2], [3, 4]]
    assert group_closure([(1, 0, 2, 3), (1, 2, 3, 0)], 4, cap=10) is None
