import itertools

import numpy as np
import pytest

from jodag import Dag, Ordering, WeightedDag, random_ordered_dag
from jodag.oracle import markov_equivalent


class TestConstruction:
    def test_rejects_cycle(self):
        with pytest.raises(ValueError):
            Dag(3, [(1, 2), (2, 3), (3, 1)])

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Dag(2, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Dag(2, [(1, 3)])

    def test_adjacency_roundtrip(self):
        g = Dag(4, [(1, 2), (3, 4)])
        assert Dag.from_adjacency(g.adjacency()) == g

    def test_hash_and_eq(self):
        g = Dag(3, [(1, 2)])
        h = Dag(3, [(1, 2)])
        assert g == h and hash(g) == hash(h)
        assert g != Dag(3, [(2, 1)])


class TestConsistency:
    def test_empty_graph_any_ordering(self):
        g = Dag(3)
        for perm in itertools.permutations((1, 2, 3)):
            assert g.is_consistent(Ordering(perm))

    def test_single_edge(self):
        g = Dag(2, [(1, 2)])
        assert not g.is_consistent(Ordering((2, 1)))
        assert g.is_consistent(Ordering((1, 2)))

    def test_collider(self):
        g = Dag(3, [(1, 3), (2, 3)])
        assert g.is_consistent(Ordering((2, 1, 3)))

    def test_acyclic_iff_some_consistent_ordering(self, rng):
        # exhaustive over orderings for small random DAGs
        for _ in range(20):
            p = int(rng.integers(2, 7))
            g = random_ordered_dag(p, 0.5, Ordering.identity(p), rng)
            assert any(
                g.is_consistent(Ordering(perm))
                for perm in itertools.permutations(range(1, p + 1))
            )
            assert g.is_consistent(g.topological_ordering())


class TestStructure:
    def test_collider_v_structure(self):
        g = Dag(3, [(1, 3), (2, 3)])
        assert g.v_structures() == {(1, 3, 2)}

    def test_shielded_collider_is_not_v(self):
        g = Dag(3, [(1, 3), (2, 3), (1, 2)])
        assert g.v_structures() == frozenset()

    def test_chain_has_none(self):
        assert Dag(3, [(1, 2), (2, 3)]).v_structures() == frozenset()

    def test_parent_set_and_skeleton(self):
        g = Dag(3, [(1, 3), (2, 3)])
        assert g.parent_set(3) == {1, 2}
        assert g.parent_set(1) == frozenset()
        assert g.skeleton() == {(1, 3), (2, 3)}


class TestCoveredEdges:
    def test_single_edge_covered(self):
        assert Dag(2, [(1, 2)]).covered_edges() == {(1, 2)}

    def test_collider_has_none(self):
        assert Dag(3, [(1, 3), (2, 3)]).covered_edges() == frozenset()

    def test_complete_triangle(self):
        # hand check per definition: parents of target equal parents of
        # source plus the source
        g = Dag(3, [(1, 2), (1, 3), (2, 3)])
        assert g.covered_edges() == {(1, 2), (2, 3)}

    def test_reversal_preserves_class(self, rng):
        for _ in range(30):
            p = int(rng.integers(2, 8))
            g = random_ordered_dag(p, 0.5, Ordering.identity(p), rng)
            for i, j in g.covered_edges():
                h = g.reverse_edge(i, j)
                assert h.skeleton() == g.skeleton()
                assert h.v_structures() == g.v_structures()
                assert markov_equivalent(g, h)


class TestHamming:
    def test_identical(self):
        g = Dag(3, [(1, 2)])
        assert g.hamming(g) == 0

    def test_reversal_costs_two(self):
        assert Dag(2, [(1, 2)]).hamming(Dag(2, [(2, 1)])) == 2

    def test_missing_edge_costs_one(self):
        assert Dag(3, [(1, 2), (1, 3)]).hamming(Dag(3, [(1, 2)])) == 1

    def test_metric_properties(self, rng):
        for _ in range(20):
            p = int(rng.integers(2, 7))
            gs = [random_ordered_dag(p, 0.5, Ordering.identity(p), rng) for _ in range(3)]
            a, b, c = gs
            assert a.hamming(b) == b.hamming(a)
            assert a.hamming(c) <= a.hamming(b) + b.hamming(c)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            Dag(2).hamming(Dag(3))


class TestSerialization:
    def test_roundtrip(self):
        g = Dag(4, [(1, 2), (2, 4), (3, 4)])
        assert Dag.from_lines(g.to_lines()) == g

    def test_header_required(self):
        with pytest.raises(ValueError):
            Dag.from_lines(["1,2"])


class TestWeightedDag:
    def test_weights_must_match_edges(self):
        g = Dag(2, [(1, 2)])
        with pytest.raises(ValueError):
            WeightedDag(dag=g, weights={})
        with pytest.raises(ValueError):
            WeightedDag(dag=g, weights={(1, 2): 0.5, (2, 1): 0.5})

    def test_noise_vars_positive(self):
        g = Dag(2, [(1, 2)])
        with pytest.raises(ValueError):
            WeightedDag(dag=g, weights={(1, 2): 0.5}, noise_vars=(1.0, 0.0))

    def test_coefficient_matrix(self):
        g = Dag(2, [(1, 2)])
        scm = WeightedDag(dag=g, weights={(1, 2): 0.7})
        b = scm.coefficient_matrix()
        assert b[0, 1] == 0.7 and np.count_nonzero(b) == 1
        assert scm.noise_vars == (1.0, 1.0)
