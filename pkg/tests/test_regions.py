import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consensus_kit.errors import BadArgs, BadFamilyArgs, NotConnected, NotSourceOrSink, TooLarge
from consensus_kit.graph import Orientation, UndirectedGraph, chromatic_polynomial_at, is_acyclic
from consensus_kit.regions import (
    closed_form_regions,
    count_regions_repulsive,
    cycle_class_size,
    enumerate_acyclic_orientations,
    source_sink_flip,
)

import oracles


@st.composite
def connected_graphs(draw, max_n=6, max_m=9):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 10 ** 6))
    extra = draw(st.floats(0.0, 0.6))
    g = oracles.random_connected_graph(n, random.Random(seed), extra)
    if g.m > max_m:
        g = oracles.random_tree(n, random.Random(seed))
    return g


class TestEnumeration:
    @pytest.mark.parametrize(
        "g, expected",
        [(UndirectedGraph.complete(4), 24), (UndirectedGraph.cycle(4), 14), (UndirectedGraph.path(3), 4)],
    )
    def test_examples(self, g, expected):
        assert len(enumerate_acyclic_orientations(g)) == expected

    def test_all_distinct_and_acyclic(self):
        found = enumerate_acyclic_orientations(UndirectedGraph.complete(5))
        assert len({o.bits for o in found}) == len(found) == 120
        assert all(is_acyclic(o) for o in found)

    def test_edge_bound(self):
        with pytest.raises(TooLarge):
            enumerate_acyclic_orientations(UndirectedGraph.complete(8))

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs())
    def test_count_is_chromatic_value(self, g):
        n_a = len(enumerate_acyclic_orientations(g))
        assert n_a == abs(chromatic_polynomial_at(g, -1)) == oracles.acyclic_orientation_count(g)


class TestFlip:
    def test_flip_source(self):
        g = UndirectedGraph.path(3)
        o = Orientation.from_arcs(g, [(2, 1), (2, 3)])
        assert sorted(source_sink_flip(o, 2).arcs()) == [(1, 2), (3, 2)]

    def test_flip_interior_vertex_refused(self):
        g = UndirectedGraph.path(3)
        with pytest.raises(NotSourceOrSink):
            source_sink_flip(Orientation.from_arcs(g, [(1, 2), (2, 3)]), 2)

    def test_flip_unknown_vertex(self):
        with pytest.raises(BadArgs):
            source_sink_flip(Orientation(UndirectedGraph.path(3), 0), 7)

    @settings(max_examples=30, deadline=None)
    @given(connected_graphs(max_m=12))
    def test_flips_stay_acyclic_and_are_involutions(self, g):
        for o in enumerate_acyclic_orientations(g):
            for v in g.vertices:
                try:
                    f = source_sink_flip(o, v)
                except NotSourceOrSink:
                    continue
                assert is_acyclic(f)
                assert source_sink_flip(f, v) == o


class TestRegionCount:
    @pytest.mark.parametrize("n", range(3, 8))
    def test_cycles(self, n):
        r = count_regions_repulsive(UndirectedGraph.cycle(n))
        assert r.r0 == n - 1
        assert r.n_cyclic == 2

    @pytest.mark.parametrize("n, expected", [(3, 2), (4, 6), (5, 24)])
    def test_complete(self, n, expected):
        r = count_regions_repulsive(UndirectedGraph.complete(n))
        assert r.r0 == expected
        assert r.n_acyclic == math.factorial(n)

    @pytest.mark.parametrize("seed", range(10))
    def test_trees(self, seed):
        rng = random.Random(seed)
        g = oracles.random_tree(rng.randint(2, 8), rng)
        r = count_regions_repulsive(g)
        assert r.r0 == 1 and r.n_cyclic == 0

    def test_disconnected(self):
        with pytest.raises(NotConnected):
            count_regions_repulsive(UndirectedGraph(3, ((1, 2),)))

    def test_too_large(self):
        with pytest.raises(TooLarge):
            count_regions_repulsive(UndirectedGraph.complete(8))

    @settings(max_examples=30, deadline=None)
    @given(connected_graphs())
    def test_classes_partition_the_acyclic_orientations(self, g):
        r = count_regions_repulsive(g)
        assert sum(r.class_sizes) == r.n_acyclic
        assert len(r.class_representatives) == r.r0
        assert r.n_acyclic + r.n_cyclic == 2 ** g.m

    @settings(max_examples=30, deadline=None)
    @given(connected_graphs())
    def test_matches_union_find_oracle(self, g):
        assert count_regions_repulsive(g).r0 == oracles.region_classes(g)

    def test_cycle_classes_are_binomial(self):
        n = 6
        r = count_regions_repulsive(UndirectedGraph.cycle(n))
        # each class collects the orientations with the same number of clockwise edges
        assert sorted(r.class_sizes) == sorted(math.comb(n, p) for p in range(1, n))

    def test_report_json(self):
        doc = count_regions_repulsive(UndirectedGraph.complete(4)).to_json()
        assert doc == {"r0": 6, "n_acyclic": 24, "n_cyclic": 40}


class TestClosedForms:
    @pytest.mark.parametrize("n", range(3, 8))
    def test_agree_with_enumeration(self, n):
        assert closed_form_regions("cycle", n) == count_regions_repulsive(UndirectedGraph.cycle(n)).r0
        assert closed_form_regions("tree", n) == count_regions_repulsive(UndirectedGraph.path(n)).r0
        if n <= 6:
            assert closed_form_regions("complete", n) == count_regions_repulsive(UndirectedGraph.complete(n)).r0

    @pytest.mark.parametrize("family, n", [("cycle", 2), ("tree", 1), ("complete", 1), ("wheel", 5)])
    def test_bad_arguments(self, family, n):
        with pytest.raises(BadFamilyArgs):
            closed_form_regions(family, n)

    def test_cycle_class_size(self):
        assert [cycle_class_size(5, p) for p in range(6)] == [1, 5, 10, 10, 5, 1]
        with pytest.raises(BadArgs):
            cycle_class_size(4, 5)
