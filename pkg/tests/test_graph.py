import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from dancar.graph import (
    CycleError,
    DirectedGraph,
    EdgeListParseError,
    GraphError,
    format_edge_list,
    largest_weakly_connected_component,
    parse_edge_list,
    sample_negative_pairs,
    split_edges,
    transitive_closure,
)
from tests._util import brute_closure, cycle_graph, perfect_tree, random_dag


@st.composite
def graphs(draw, max_nodes=8, dag=False):
    n = draw(st.integers(1, max_nodes))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    edges = draw(st.lists(pairs, max_size=3 * n))
    if dag:
        edges = [(min(a, b), max(a, b)) for a, b in edges]
    return DirectedGraph.from_edges(n, edges)


class TestParse:
    def test_simple(self):
        g = parse_edge_list("a b\nb c")
        assert g.n_nodes == 3
        assert g.edge_set() == {(0, 1), (1, 2)}
        assert g.labels == ("a", "b", "c")

    def test_duplicates_and_self_loops_dropped(self, caplog):
        with caplog.at_level(logging.WARNING):
            g = parse_edge_list("a b\na b\na a")
        assert g.n_nodes == 2 and g.n_edges == 1
        assert "1 duplicate edge(s) and 1 self-loop(s)" in caplog.text

    def test_empty(self):
        g = parse_edge_list("")
        assert g.n_nodes == 0 and g.n_edges == 0

    def test_comments_and_blank_lines(self):
        g = parse_edge_list("# header\n\nx y\n  # indented comment\n")
        assert g.edge_set() == {(0, 1)}

    def test_malformed_line_reports_number(self):
        with pytest.raises(EdgeListParseError) as exc:
            parse_edge_list("a b\nc\n")
        assert exc.value.lineno == 2
        with pytest.raises(EdgeListParseError, match="line 1"):
            parse_edge_list("a b c")

    def test_fixed_vocabulary(self):
        g = parse_edge_list("b a", labels=["a", "b", "c"])
        assert g.n_nodes == 3 and g.edge_set() == {(1, 0)}
        with pytest.raises(GraphError, match="unknown node label"):
            parse_edge_list("a z", labels=["a", "b"])

    def test_round_trip(self):
        g = parse_edge_list("a b\nb c\nc a\nd a\n")
        assert parse_edge_list(format_edge_list(g)).edge_set() == g.edge_set()


class TestGraphInvariants:
    def test_rejects_self_loops_and_duplicates(self):
        with pytest.raises(GraphError):
            DirectedGraph(2, [(0, 0)])
        with pytest.raises(GraphError):
            DirectedGraph(2, [(0, 1), (0, 1)])

    @given(graphs())
    def test_adjacency_matches_edges(self, g):
        from_out = {(v, int(w)) for v in range(g.n_nodes) for w in g.successors(v)}
        from_in = {(int(u), v) for v in range(g.n_nodes) for u in g.predecessors(v)}
        assert from_out == from_in == g.edge_set()
        assert all((a, a) not in g.edge_set() for a in range(g.n_nodes))

    def test_edges_are_readonly(self):
        g = cycle_graph(3)
        with pytest.raises(ValueError):
            g.edges[0, 0] = 2


class TestClosure:
    def test_path(self):
        g = parse_edge_list("a b\nb c")
        assert transitive_closure(g).edge_set() == {(0, 1), (1, 2), (0, 2)}

    def test_binary_tree_depth3(self):
        g = perfect_tree(2, 3)
        assert (g.n_nodes, g.n_edges) == (15, 14)
        expected = brute_closure(g)
        assert len(expected) == 34
        assert transitive_closure(g).edge_set() == expected

    def test_cycle_rejected(self):
        g = parse_edge_list("s a\na b\nb c\nc a\nc t")
        with pytest.raises(CycleError) as exc:
            transitive_closure(g)
        assert g.labels[exc.value.node] in {"a", "b", "c"}

    @given(graphs(dag=True))
    def test_matches_dfs_oracle(self, g):
        assert transitive_closure(g).edge_set() == brute_closure(g)

    @given(graphs(dag=True))
    def test_idempotent_and_monotone(self, g):
        c = transitive_closure(g)
        assert transitive_closure(c) == c
        assert g.edge_set() <= c.edge_set()


class TestComponents:
    def test_largest(self):
        g = DirectedGraph(5, [(0, 1), (2, 3), (3, 4)])
        sub = largest_weakly_connected_component(g)
        assert sub.labels == ("2", "3", "4")
        assert sub.edge_set() == {(0, 1), (1, 2)}

    def test_connected_is_identity(self):
        g = cycle_graph(4)
        assert largest_weakly_connected_component(g) == g

    def test_tie_goes_to_node_zero(self):
        g = DirectedGraph(4, [(3, 2), (1, 0)])
        assert largest_weakly_connected_component(g).labels == ("0", "1")

    def test_empty(self):
        assert largest_weakly_connected_component(DirectedGraph(0)).n_nodes == 0

    def test_direction_ignored(self):
        g = DirectedGraph(5, [(1, 0), (2, 0), (3, 4)])
        assert largest_weakly_connected_component(g).n_nodes == 3


class TestSplit:
    def test_full_fraction(self):
        g = random_dag(20, 0)
        train, held = split_edges(g, 1.0, 3)
        assert train == g and len(held) == 0

    def test_half(self):
        g = DirectedGraph(11, [(i, i + 1) for i in range(10)])
        train, held = split_edges(g, 0.5, 1)
        assert train.n_edges == 5 and len(held) == 5
        assert train.n_nodes == g.n_nodes
        held_set = {tuple(e) for e in held.tolist()}
        assert not train.edge_set() & held_set
        assert train.edge_set() | held_set == g.edge_set()

    def test_deterministic(self):
        g = random_dag(30, 1)
        a, b = split_edges(g, 0.5, 42), split_edges(g, 0.5, 42)
        assert a[0] == b[0] and np.array_equal(a[1], b[1])

    @settings(max_examples=50)
    @given(graphs(), st.floats(0.01, 1.0), st.integers(0, 2**31))
    def test_partition_law(self, g, frac, seed):
        train, held = split_edges(g, frac, seed)
        held_set = {tuple(e) for e in held.tolist()}
        assert not train.edge_set() & held_set
        assert train.edge_set() | held_set == g.edge_set()
        assert train.n_edges == int(np.floor(frac * g.n_edges + 0.5))

    def test_bad_fraction(self):
        with pytest.raises(GraphError):
            split_edges(cycle_graph(3), 0.0, 0)


class TestNegativeSampling:
    def test_complete_graph_exact_errors(self):
        g = DirectedGraph(3, [(a, b) for a in range(3) for b in range(3) if a != b])
        with pytest.raises(GraphError, match="no negative pairs"):
            sample_negative_pairs(g, 10, 0, "exact")

    def test_three_cycle_complement(self):
        g = cycle_graph(3)
        s = sample_negative_pairs(g, 2000, 0, "exact")
        assert {tuple(p) for p in s.tolist()} == {(1, 0), (2, 1), (0, 2)}

    def test_approximate_never_self(self):
        s = sample_negative_pairs(cycle_graph(5), 5000, 1, "approximate")
        assert np.all(s[:, 0] != s[:, 1])
        # approximate mode may return true edges
        assert cycle_graph(5).has_edges(s[:, 0], s[:, 1]).any()

    def test_deterministic(self):
        g = random_dag(30, 0)
        assert np.array_equal(sample_negative_pairs(g, 100, 7), sample_negative_pairs(g, 100, 7))

    @pytest.mark.parametrize("edges", [[(0, 1), (1, 2)], [(a, b) for a in range(4) for b in range(4) if a != b and (a + b) % 3]])
    def test_exact_uniformity(self, edges):
        # second case is dense (> 1/2) and goes through the enumeration path
        g = DirectedGraph(4, edges)
        comp = [(a, b) for a in range(4) for b in range(4) if a != b and (a, b) not in g.edge_set()]
        s = sample_negative_pairs(g, 20000, 123, "exact")
        assert not g.has_edges(s[:, 0], s[:, 1]).any()
        counts = np.array([np.sum((s[:, 0] == a) & (s[:, 1] == b)) for a, b in comp])
        assert counts.sum() == len(s)
        expected = len(s) / len(comp)
        stat = float(((counts - expected) ** 2 / expected).sum())
        assert stat < chi2.ppf(1 - 0.001, len(comp) - 1)

    @settings(max_examples=30)
    @given(graphs(max_nodes=6), st.integers(0, 1000))
    def test_exact_never_returns_edges(self, g, seed):
        if g.n_nodes * (g.n_nodes - 1) - g.n_edges <= 0:
            return
        s = sample_negative_pairs(g, 200, seed, "exact")
        assert s.shape == (200, 2)
        assert not g.has_edges(s[:, 0], s[:, 1]).any()
        assert np.all(s[:, 0] != s[:, 1])
