import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homlab.combination import (GraphCombination, Term, edge_term, equality_term, eval_combination,
                                eval_table, formula_to_combination, glue_terms, graph_to_formula,
                                interpolate, lagrange_coefficients, sentence_equivalence_probe,
                                sentence_for_graph, unit, unit_term, zero)
from homlab.enumeration import graphs_up_to_iso
from homlab.graph import Graph, LabelledGraph
from homlab.homcount import hom_count_brute, hom_count_labelled
from homlab.logic import FALSE, TRUE, Edge, FormulaError, Not, model_check, random_formula
from homlab.treedec import TwkDecomposition, is_twk, labelled_decomposition, make_decomposition

SMALL = [g for n in range(1, 5) for g in graphs_up_to_iso(n)]
THREE = [g for n in range(1, 4) for g in graphs_up_to_iso(n)]


def labelled_instances(graph_list, arity):
    for g in graph_list:
        for w in itertools.product(g.vertices, repeat=arity):
            yield LabelledGraph(g, w)


def assert_models(q, phi, p, k, graph_list=SMALL):
    for lg in labelled_instances(graph_list, k + 1):
        want = int(model_check(phi, lg.graph, dict(enumerate(lg.labels, 1)), p))
        assert eval_combination(q, lg) == want, (phi, lg)


def assert_terms_valid(q):
    for _, t in q.terms():
        assert is_twk(t.graph, t.dec, strict=False)


class TestBasics:
    def test_true_is_unit(self):
        q = formula_to_combination(TRUE, 3, 1)
        assert q == unit(3, 1)
        (coef, term), = q.terms()
        assert coef == 1 and term.graph.graph.m == 0 and len(set(term.graph.labels)) == 2

    def test_self_edge_is_zero(self):
        assert formula_to_combination(Edge(1, 1), 2, 1) == zero(2, 1)
        assert len(formula_to_combination(Edge(1, 1), 2, 1)) == 0

    def test_empty_evaluates_to_zero(self):
        for lg in labelled_instances(THREE, 2):
            assert eval_combination(zero(5, 1), lg) == 0

    def test_unit_evaluates_to_one(self):
        for lg in labelled_instances(THREE, 3):
            assert eval_combination(unit(3, 2), lg) == 1

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            eval_combination(unit(2, 1), LabelledGraph(Graph.complete(2), (0,)))
        with pytest.raises(ValueError):
            unit(2, 1) + unit(2, 2)

    def test_variable_bound(self):
        with pytest.raises(FormulaError):
            formula_to_combination(Edge(1, 3), 2, 1)

    def test_non_prime(self):
        with pytest.raises(ValueError):
            GraphCombination(4, 1)

    @given(st.integers(0, 10 ** 6), st.sampled_from([2, 3, 5]))
    def test_linear_and_multiplicative(self, seed, p):
        rng = random.Random(seed)
        k = 1
        basis = [unit_term(k), edge_term(1, 2, k), equality_term(1, 2, k)]

        def rand_comb():
            return GraphCombination(p, k, [(rng.randrange(p), rng.choice(basis)) for _ in range(3)])

        q1, q2 = rand_comb(), rand_comb()
        for lg in labelled_instances(THREE, 2):
            a, b = eval_combination(q1, lg), eval_combination(q2, lg)
            assert eval_combination(q1 + q2, lg) == (a + b) % p
            assert eval_combination(q1 - q2, lg) == (a - b) % p
            assert eval_combination(q1.scale(2), lg) == 2 * a % p
            assert eval_combination(q1.glue(q2), lg) == a * b % p

    def test_eval_table_matches_pointwise(self):
        q = formula_to_combination(Not(Edge(1, 2)), 3, 1)
        for g in THREE:
            table = eval_table(q, g)
            for w in itertools.product(g.vertices, repeat=2):
                assert table.get(w, 0) == eval_combination(q, LabelledGraph(g, w))


class TestInterpolation:
    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_lagrange(self, p):
        for size in range(p + 1):
            for x1 in itertools.combinations(range(p), size):
                coeffs = lagrange_coefficients(x1, p)
                for x in range(p):
                    val = sum(c * x ** i for i, c in enumerate(coeffs)) % p
                    assert val == (1 if x in x1 else 0)

    @pytest.mark.parametrize("p", [2, 3])
    def test_full_and_empty(self, p):
        q = GraphCombination(p, 1, [(1, edge_term(1, 2, 1))])
        everything, nothing = interpolate(q, range(p)), interpolate(q, [])
        for lg in labelled_instances(THREE, 2):
            assert eval_combination(everything, lg) == 1
            assert eval_combination(nothing, lg) == 0

    def test_single_edge_p2(self):
        q = GraphCombination(2, 1, [(1, edge_term(1, 2, 1))])
        r = interpolate(q, [1])
        for lg in labelled_instances(graphs_up_to_iso(3), 2):
            assert eval_combination(r, lg) == int(lg.graph.has_edge(*lg.labels))

    @given(st.integers(0, 10 ** 6))
    def test_output_is_boolean(self, seed):
        rng = random.Random(seed)
        p = 3
        q = GraphCombination(p, 1, [(rng.randrange(1, p), edge_term(1, 2, 1)),
                                    (rng.randrange(p), equality_term(1, 2, 1))])
        x1 = [x for x in range(p) if rng.random() < 0.5]
        r = interpolate(q, x1)
        for lg in labelled_instances(THREE, 2):
            v = eval_combination(r, lg)
            assert v in (0, 1)
            assert v == int(eval_combination(q, lg) in x1)


class TestFormulaToCombination:
    @settings(max_examples=40)
    @given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]), st.sampled_from([1, 2]))
    def test_random_formulas(self, seed, p, k):
        phi = random_formula(random.Random(seed), 3, k + 1, p)
        q = formula_to_combination(phi, p, k)
        assert_terms_valid(q)
        for g in SMALL:
            table = eval_table(q, g)
            for w in itertools.product(g.vertices, repeat=k + 1):
                assert table.get(w, 0) == int(model_check(phi, g, dict(enumerate(w, 1)), p))


class TestGraphToFormula:
    def test_single_bag_impossible_residue(self):
        lg = LabelledGraph(Graph.complete(2), (0, 1))
        dec = labelled_decomposition(lg, 1)
        assert graph_to_formula(lg, dec, 2, 3) == FALSE

    def test_labelled_edge(self):
        lg = LabelledGraph(Graph.complete(2), (0, 1))
        dec = labelled_decomposition(lg, 1)
        phi = graph_to_formula(lg, dec, 1, 2)
        for g in graphs_up_to_iso(3):
            for w in itertools.product(g.vertices, repeat=2):
                assert model_check(phi, g, {1: w[0], 2: w[1]}, 2) == g.has_edge(*w)

    @pytest.mark.parametrize("p,max_n", [(2, 4), (3, 3)])
    def test_tw1_labelled_graphs(self, p, max_n):
        for n in range(2, max_n + 1):
            for f in graphs_up_to_iso(n, "tw", 1):
                for labels in itertools.permutations(f.vertices, 2):
                    lf = LabelledGraph(f, labels)
                    dec = labelled_decomposition(lf, 1)
                    if dec is None:
                        continue
                    for m in range(p):
                        phi = graph_to_formula(lf, dec, m, p)
                        for lg in labelled_instances(SMALL, 2):
                            want = hom_count_labelled(lf, lg) % p == m
                            assert model_check(phi, lg.graph, dict(enumerate(lg.labels, 1)), p) == want

    @pytest.mark.parametrize("f,m,p,k", [(Graph.complete(3), 0, 2, 2), (Graph.path(3), 1, 3, 1),
                                         (Graph.cycle(4), 0, 2, 2), (Graph.complete(2), 2, 3, 1)])
    def test_sentences(self, f, m, p, k):
        phi = sentence_for_graph(f, m, p, k)
        for g in SMALL:
            assert model_check(phi, g, {}, p) == (hom_count_brute(f, g) % p == m % p)

    def test_sentence_rejects_wide_graph(self):
        with pytest.raises(ValueError):
            sentence_for_graph(Graph.complete(4), 0, 2, 1)


class TestProbe:
    def test_equal_graphs(self):
        assert sentence_equivalence_probe(Graph.cycle(4), Graph.cycle(4), 2, 1).formula is None

    @pytest.mark.parametrize("p,k", [(2, 1), (3, 1), (2, 2)])
    def test_k1_vs_coclique(self, p, k):
        assert sentence_equivalence_probe(Graph.complete(1), Graph.empty(p + 1), p, k).formula is None

    def test_edge_count_difference(self):
        res = sentence_equivalence_probe(Graph.complete(2), Graph.empty(2), 3, 1)
        assert res.verified and res.formula is not None
        assert model_check(res.formula, Graph.complete(2), {}, 3)
        assert not model_check(res.formula, Graph.empty(2), {}, 3)


def test_glue_terms_drops_loops():
    e = edge_term(1, 2, 1)
    eq = equality_term(1, 2, 1)
    assert glue_terms(e, eq) is None
    glued = glue_terms(e, e)
    assert glued.graph.graph.m == 1
