import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homlab.cfi import build_cfi
from homlab.equiv import tuple_orbits
from homlab.graph import Graph
from homlab.groups import FiniteAbelianGroup
from homlab.imgame import (DuplicatorMove, GamePosition, MalformedMove, check_similarity, find_move,
                           identity_move, partial_isomorphism_check, play_transcript, solve_game_tiny,
                           validate_move, validate_transcript, verify_similarity)
from homlab.linalg import fp_inverse, identity, matmul

P3, K3, C4 = Graph.path(3), Graph.complete(3), Graph.cycle(4)
CFI_K3 = build_cfi(FiniteAbelianGroup.cyclic(2), K3, None).graph


def all_matrices(n, p=2):
    for flat in itertools.product(range(p), repeat=n * n):
        yield [list(flat[i * n:(i + 1) * n]) for i in range(n)]


def invertible(n, p=2):
    return [m for m in all_matrices(n, p) if fp_inverse(m, p) is not None]


def exhaustive_similar(mats, n, p=2):
    for s in invertible(n, p):
        if all(matmul(m, s, p) == matmul(s, mp, p) for m, mp in mats):
            return True
    return False


def square(n, p):
    return st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=n, max_size=n)


def whole_square(g):
    return [[(u, v) for u in g.vertices for v in g.vertices]]


def type_blocks(g):
    kinds = ((True, False), (False, True), (False, False))
    blocks = [[(u, v) for u in g.vertices for v in g.vertices if (u == v, g.has_edge(u, v)) == t]
              for t in kinds]
    return [b for b in blocks if b]


class TestSimilarity:
    def test_identity(self):
        res = check_similarity([(identity(3), identity(3))], 2)
        assert res and res.witness is not None and verify_similarity([(identity(3), identity(3))], res.witness, 2)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_zero_vs_identity(self, n):
        zero = [[0] * n for _ in range(n)]
        res = check_similarity([(zero, identity(n))], 2)
        assert res.verdict == "no-witness" and res.enumerated and res.dimension == 0

    def test_conjugates_dim_4(self):
        rng = random.Random(1)
        gl4 = invertible(4)
        for _ in range(12):
            m = [[rng.randrange(2) for _ in range(4)] for _ in range(4)]
            s0 = rng.choice(gl4)
            conj = matmul(matmul(s0, m, 2), fp_inverse(s0, 2), 2)
            res = check_similarity([(conj, m)], 2)
            assert res.verdict == "witness"
            assert verify_similarity([(conj, m)], res.witness, 2)

    @settings(max_examples=80)
    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(square(n, 2), square(n, 2), square(n, 2))))
    def test_against_exhaustive_search(self, mats):
        a, b, c = mats
        n = len(a)
        pairs = [(a, b), (c, c)]
        res = check_similarity(pairs, 2)
        assert res.verdict in ("witness", "no-witness")
        assert bool(res) == exhaustive_similar(pairs, n)
        if res:
            assert verify_similarity(pairs, res.witness, 2)

    @given(st.integers(1, 3).flatmap(lambda n: square(n, 3)))
    def test_reflexive(self, m):
        assert check_similarity([(m, m)], 3)

    @settings(max_examples=60)
    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(square(n, 2), square(n, 2))))
    def test_symmetric(self, mats):
        a, b = mats
        fwd = check_similarity([(a, b)], 2)
        back = check_similarity([(b, a)], 2)
        assert bool(fwd) == bool(back)
        if fwd:
            inv = fp_inverse(fwd.witness, 2)
            assert verify_similarity([(b, a)], inv, 2)

    def test_over_f3(self):
        m = [[1, 2], [0, 1]]
        s0 = [[2, 1], [1, 1]]
        conj = matmul(matmul(s0, m, 3), fp_inverse(s0, 3), 3)
        assert check_similarity([(conj, m)], 3)

    def test_errors(self):
        with pytest.raises(ValueError):
            check_similarity([(identity(2), identity(3))], 2)
        with pytest.raises(ValueError):
            check_similarity([(identity(2), identity(2))], 4)

    def test_empty_dimension(self):
        assert check_similarity([], 2, n=0).witness == []


class TestMoves:
    def test_identity_move_on_same_structure(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        assert validate_move(pos, identity_move(pos, whole_square(P3), 1), 1, 2)
        assert validate_move(pos, identity_move(pos, type_blocks(P3), 1), 1, 2)

    def test_singular_s(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        mv = identity_move(pos, whole_square(P3), 1)
        mv.S = [[1, 1, 0], [1, 1, 0], [0, 0, 1]]
        check = validate_move(pos, mv, 1, 2)
        assert not check and "singular" in check.reason

    def test_cfi_orbit_partition(self):
        pos = GamePosition(CFI_K3, CFI_K3, (None, None), (None, None), 2, (2,))
        mv = identity_move(pos, tuple_orbits(CFI_K3, 2), 1)
        assert validate_move(pos, mv, 1, 2)

    def test_every_entry_flip_is_rejected(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        mv = identity_move(pos, type_blocks(P3), 1)
        for i, j in itertools.product(range(3), repeat=2):
            s = [row[:] for row in mv.S]
            s[i][j] ^= 1
            assert not validate_move(pos, DuplicatorMove(mv.blocks_a, mv.blocks_b, mv.bijection, s), 1, 2)

    def test_found_move_validates(self):
        q = P3.relabel({0: 2, 1: 0, 2: 1})
        pos = GamePosition(P3, q, (), (), 2, (2,))
        mv, res = find_move(pos, type_blocks(P3), type_blocks(q), 1, 2)
        assert mv is not None and res
        assert validate_move(pos, mv, 1, 2)
        again = DuplicatorMove.from_dict(json.loads(json.dumps(mv.to_dict())))
        assert validate_move(pos, again, 1, 2)

    def test_no_move_for_different_edge_counts(self):
        pos = GamePosition(P3, K3, (), (), 2, (2,))
        mv, res = find_move(pos, type_blocks(P3), type_blocks(K3), 1, 2)
        assert mv is None and res.verdict == "no-witness"

    def test_structural_defects(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        mv = identity_move(pos, type_blocks(P3), 1)
        short = DuplicatorMove([b[:] for b in mv.blocks_a], mv.blocks_b, mv.bijection, mv.S)
        short.blocks_a[0].pop()
        assert "covers" in validate_move(pos, short, 1, 2).reason
        twice = DuplicatorMove([b[:] for b in mv.blocks_a], mv.blocks_b, mv.bijection, mv.S)
        twice.blocks_a[1].append(twice.blocks_a[0][0])
        assert "twice" in validate_move(pos, twice, 1, 2).reason
        merged = DuplicatorMove([mv.blocks_a[0] + mv.blocks_a[1], mv.blocks_a[2]], mv.blocks_b, [0, 1], mv.S)
        assert not validate_move(pos, merged, 1, 2)
        notbij = DuplicatorMove(mv.blocks_a, mv.blocks_b, [0, 0, 1], mv.S)
        assert "bijection" in validate_move(pos, notbij, 1, 2).reason

    def test_malformed(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        s = identity(3)
        with pytest.raises(MalformedMove):
            validate_move(pos, DuplicatorMove([[(0, 1, 2)]], [[(0, 1)]], [0], s), 1, 2)
        with pytest.raises(MalformedMove):
            validate_move(pos, DuplicatorMove([[(0, 9)]], [[(0, 1)]], [0], s), 1, 2)
        with pytest.raises(MalformedMove):
            validate_move(pos, DuplicatorMove([[]], [[(0, 1)]], [0], s), 1, 2)
        with pytest.raises(MalformedMove):
            DuplicatorMove.from_dict({"blocks_a": []})

    def test_parameter_errors(self):
        pos = GamePosition(P3, P3, (), (), 2, (2,))
        mv = identity_move(pos, whole_square(P3), 1)
        with pytest.raises(ValueError):
            validate_move(pos, mv, 2, 2)
        with pytest.raises(ValueError):
            validate_move(pos, mv, 1, 3)

    def test_position_validation(self):
        with pytest.raises(ValueError):
            GamePosition(P3, P3, (0,), (), 2)
        with pytest.raises(ValueError):
            GamePosition(P3, P3, (0, 1, 2), (0, 1, 2), 2)
        with pytest.raises(ValueError):
            GamePosition(P3, P3, (0, None), (0, 1), 2)
        with pytest.raises(ValueError):
            GamePosition(P3, P3, (), (), 2, (4,))


class TestPartialIso:
    def test_empty(self):
        assert partial_isomorphism_check(GamePosition(P3, K3, (), (), 2))

    def test_edge_vs_non_edge(self):
        assert not partial_isomorphism_check(GamePosition(P3, P3, (0, 1), (0, 2), 2))
        assert partial_isomorphism_check(GamePosition(P3, P3, (0, 1), (2, 1), 2))

    def test_not_well_defined(self):
        assert not partial_isomorphism_check(GamePosition(P3, P3, (0, 0), (0, 2), 2))

    def test_same_orbit_tuples(self):
        for orbit in tuple_orbits(CFI_K3, 2):
            for t in orbit[:4]:
                for u in orbit[:4]:
                    assert partial_isomorphism_check(GamePosition(CFI_K3, CFI_K3, t, u, 2))


class TestSolver:
    def test_k3_vs_p3(self):
        v = solve_game_tiny(K3, P3, 3)
        assert v.verdict == "spoiler-wins" and v.complete

    def test_size_mismatch(self):
        v = solve_game_tiny(K3, C4, 3)
        assert (v.verdict, v.rounds) == ("spoiler-wins", 0)

    @pytest.mark.parametrize("g", [P3, C4, Graph.cycle(5), Graph.star(3)], ids=["P3", "C4", "C5", "S3"])
    def test_isomorphic_pairs_survive(self, g):
        perm = list(reversed(g.vertices))
        h = g.relabel(dict(zip(g.vertices, perm)))
        v = solve_game_tiny(g, h, 3, round_cap=4)
        assert (v.verdict, v.rounds) == ("duplicator-survives", 4)

    @pytest.mark.parametrize("a,b", [(K3, P3), (C4, Graph.path(4)), (Graph.star(3), Graph.path(4)),
                                     (Graph.cycle(6), Graph.from_edges(6, [(0, 1), (1, 2), (2, 0),
                                                                          (3, 4), (4, 5), (5, 3)]))],
                             ids=["K3-P3", "C4-P4", "S3-P4", "C6-2K3"])
    def test_antisymmetric(self, a, b):
        fwd = solve_game_tiny(a, b, 3, round_cap=3)
        back = solve_game_tiny(b, a, 3, round_cap=3)
        assert (fwd.verdict, fwd.rounds) == (back.verdict, back.rounds)

    def test_bounds(self):
        with pytest.raises(ValueError):
            solve_game_tiny(K3, K3, 4)
        with pytest.raises(ValueError):
            solve_game_tiny(K3, K3, 3, ell_max=2)
        with pytest.raises(ValueError):
            solve_game_tiny(Graph.cycle(7), Graph.cycle(7), 3)


class TestTranscripts:
    def test_recorded_game_is_legal(self):
        c5 = Graph.cycle(5)
        doc = play_transcript(c5, c5.relabel({0: 0, 1: 2, 2: 4, 3: 1, 4: 3}), 3, (2, 3), rounds=4, seed=3)
        assert len(doc["rounds"]) == 4
        rep = validate_transcript(json.dumps(doc))
        assert rep.legal and rep.winner == "duplicator-alive" and rep.rounds == 4

    def test_deterministic(self):
        assert play_transcript(C4, C4, 2, (2,), 3, seed=9) == play_transcript(C4, C4, 2, (2,), 3, seed=9)

    def test_tampered_matrix(self):
        doc = play_transcript(C4, C4, 2, (2,), 2, seed=1)
        s = doc["rounds"][0]["move"]["S"]
        s[0][0] ^= 1
        rep = validate_transcript(doc)
        assert not rep.legal and rep.winner == "illegal"

    def test_tampered_spoiler_choice(self):
        doc = play_transcript(C4, C4, 2, (2,), 1, seed=1)
        rd = doc["rounds"][0]
        other = (rd["spoiler"]["block"] + 1) % len(rd["move"]["blocks_a"])
        rd["spoiler"]["u"] = rd["move"]["blocks_a"][other][0]
        assert validate_transcript(doc).winner == "illegal"

    def test_spoiler_win_recorded(self):
        # one-block partition with S = I is legal on A = B; Spoiler then pairs an edge with a non-edge
        pos = GamePosition(P3, P3, (None, None), (None, None), 2, (2,))
        mv = identity_move(pos, whole_square(P3), 1)
        doc = {"A": {"kind": "graph", "graph": {"n": 3, "edges": [[0, 1], [1, 2]]}},
               "B": {"kind": "graph", "graph": {"n": 3, "edges": [[0, 1], [1, 2]]}},
               "k": 2, "primes": [2],
               "rounds": [{"prime": 2, "ell": 1, "lift": [0, 1], "move": mv.to_dict(),
                           "spoiler": {"block": 0, "u": [0, 1], "v": [0, 2]}}]}
        rep = validate_transcript(doc)
        assert rep.legal and rep.winner == "spoiler" and rep.rounds == 1

    def test_recording_stops_when_types_cannot_answer(self):
        doc = play_transcript(K3, P3, 2, (2,), 3, seed=0)
        assert doc["rounds"] == []
        assert validate_transcript(doc).legal

    def test_malformed_transcript(self):
        with pytest.raises(MalformedMove):
            validate_transcript({"A": {}, "k": 2})
