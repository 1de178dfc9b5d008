import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs
from homlab.graph import Graph
from homlab.logic import (FALSE, TRUE, And, Edge, Eq, FormulaError, ModExists, Not, Or, conj, depth,
                          disj, free_vars, model_check, parse, random_formula, size, to_text, variables)


def naive(phi, g, env, p):
    if phi == TRUE:
        return True
    if isinstance(phi, Eq):
        return env[phi.i] == env[phi.j]
    if isinstance(phi, Edge):
        return g.has_edge(env[phi.i], env[phi.j])
    if isinstance(phi, Not):
        return not naive(phi.body, g, env, p)
    if isinstance(phi, And):
        return naive(phi.left, g, env, p) and naive(phi.right, g, env, p)
    if isinstance(phi, Or):
        return naive(phi.left, g, env, p) or naive(phi.right, g, env, p)
    count = sum(1 for v in g.vertices if naive(phi.body, g, {**env, phi.var: v}, p))
    return count % p == phi.c % p


def first_order_exists_two_distinct(g):
    """The plain first-order sentence: some x1 and some x2 are different."""
    return any(a != b for a in g.vertices for b in g.vertices)


formulas = st.builds(lambda seed, d, p: random_formula(random.Random(seed), d, 3, p),
                     st.integers(0, 10 ** 6), st.integers(0, 4), st.sampled_from([2, 3, 5]))


@given(formulas)
def test_print_parse_round_trip(phi):
    assert parse(to_text(phi)) == phi


@given(formulas, graphs(1, 4), st.data())
def test_model_check_matches_naive(phi, g, data):
    env = {v: data.draw(st.sampled_from(g.vertices)) for v in (1, 2, 3)}
    for p in (2, 3):
        assert model_check(phi, g, env, p) == naive(phi, g, env, p)


def test_k2_example():
    phi = ModExists(2, 1, ModExists(1, 2, Edge(1, 2)))
    assert model_check(phi, Graph.complete(2), {}, 3)


@given(graphs(1, 5))
def test_edge_to_itself_is_false(g):
    for v in g.vertices:
        assert not model_check(Edge(1, 1), g, {1: v}, 2)


def test_k1_and_two_distinct_vertices():
    assert not first_order_exists_two_distinct(Graph.complete(1))
    assert first_order_exists_two_distinct(Graph.empty(3))
    # the counting version with p=2 is false on K1 and on the coclique on 3 vertices alike
    phi = ModExists(1, 1, ModExists(1, 2, Not(Eq(1, 2))))
    assert not model_check(phi, Graph.complete(1), {}, 2)
    assert not model_check(phi, Graph.empty(3), {}, 2)


def test_unbound_variable():
    with pytest.raises(FormulaError, match="unbound"):
        model_check(Edge(1, 2), Graph.complete(2), {1: 0}, 2)


@pytest.mark.parametrize("text", ["E(x1", "(x1=x2)", "x1=x2 &", "E[1]x1", "foo", "(true&true"])
def test_parse_errors(text):
    with pytest.raises(FormulaError):
        parse(text)


def test_syntax_helpers():
    phi = parse("E[1]x2.(E(x1,x2)&!x2=x3)")
    assert free_vars(phi) == {1, 3}
    assert variables(phi) == {1, 2, 3}
    assert depth(phi) >= 3 and size(phi) >= 5
    assert conj([]) == TRUE and disj([]) == FALSE
    assert to_text(parse("  true ")) == "true"
