import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from dancar.core import DancarEmbedding, reconstruct_edges
from dancar.evaluation import (
    EvalError,
    EvalReport,
    average_precision,
    compare_edges,
    dancar_ranker,
    link_prediction_report,
    map_score,
    poincare_ranker,
    radius_outdegree_spearman,
    reconstruction_report,
    spearman,
)
from dancar.graph import DirectedGraph, split_edges
from tests._util import cycle_graph, random_embedding, random_graph


def cycle_embedding(n=3):
    """Anchors on a circle; each disk reaches only the next anchor."""
    ang = 2 * np.pi * np.arange(n) / n
    x = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    nxt = np.roll(x, -1, axis=0)
    return DancarEmbedding(x, nxt, np.full(n, 0.1))


def table_ranker(scores: np.ndarray):
    return lambda h, t: scores[h, t]


class TestReports:
    def test_perfect_cycle(self):
        r = reconstruction_report(cycle_graph(3), cycle_embedding(3))
        assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)

    def test_half_right(self):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        r = compare_edges(np.array([[0, 1], [2, 0]]), g)
        assert (r.true_positives, r.false_positives, r.false_negatives) == (1, 1, 1)
        assert (r.precision, r.recall, r.f1) == (0.5, 0.5, 0.5)

    def test_empty_prediction(self):
        r = compare_edges(np.empty((0, 2)), cycle_graph(3))
        assert (r.precision, r.recall, r.f1) == (0.0, 0.0, 0.0)

    def test_node_mismatch(self):
        with pytest.raises(EvalError, match="node mismatch"):
            reconstruction_report(cycle_graph(4), cycle_embedding(3))

    def test_f1_one_iff_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            e = random_embedding(rng, 8, 2)
            pred = reconstruct_edges(e)
            g = DirectedGraph(8, pred)
            assert reconstruction_report(g, e).f1 == 1.0
            if len(pred):
                g2 = DirectedGraph(8, pred[1:])
                assert reconstruction_report(g2, e).f1 < 1.0

    def test_relabel_invariance(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 12, 0.3)
        e = random_embedding(rng, 12, 3)
        perm = rng.permutation(12)
        inv = np.argsort(perm)
        g2 = DirectedGraph(12, inv[g.edges])
        e2 = DancarEmbedding(e.anchors[perm], e.centers[perm], e.radii[perm])
        assert reconstruction_report(g, e) == reconstruction_report(g2, e2)

    def test_serialisation(self):
        r = EvalReport.from_counts(3, 4, 6)
        assert "precision=0.75" in r.to_text().splitlines()
        assert "map=" not in r.summary_line()
        r.map = 0.5
        assert r.summary_line().endswith("map=0.5")


class TestLinkPrediction:
    def test_full_fraction_matches_reconstruction(self):
        rng = np.random.default_rng(0)
        g = random_graph(rng, 15, 0.2)
        e = random_embedding(rng, 15, 2)
        train, _ = split_edges(g, 1.0, 0)
        assert link_prediction_report(g, train, e) == reconstruction_report(g, e)

    def test_train_half_recall(self):
        g = DirectedGraph(11, [(i, i + 1) for i in range(10)])
        train, _ = split_edges(g, 0.5, 4)
        # hand-built embedding reconstructing exactly the training edges
        anchors = np.stack([np.arange(11) * 10.0, np.zeros(11)], axis=1)
        centers = anchors.copy()
        radii = np.full(11, 0.5)
        for v, w in train.edges:
            centers[v] = anchors[w]
        e = DancarEmbedding(anchors, centers, radii)
        assert {tuple(p) for p in reconstruct_edges(e).tolist()} == train.edge_set()
        r = link_prediction_report(g, train, e)
        assert r.recall == 0.5 and r.precision == 1.0

    def test_not_subset(self):
        g = DirectedGraph(3, [(0, 1)])
        with pytest.raises(EvalError, match="subset"):
            link_prediction_report(g, DirectedGraph(3, [(1, 2)]), cycle_embedding(3))


class TestMap:
    def test_perfect_ranking(self):
        g = cycle_graph(5)
        assert map_score(g, dancar_ranker(cycle_embedding(5))) == 1.0

    def test_second_of_three(self):
        g = DirectedGraph(4, [(0, 2)])
        s = np.zeros((4, 4))
        s[0] = [0.0, 1.0, 2.0, 3.0]
        assert map_score(g, table_ranker(s)) == 0.5

    def test_ties_by_id(self):
        g = DirectedGraph(3, [(0, 2)])
        assert map_score(g, table_ranker(np.zeros((3, 3)))) == 0.5
        g = DirectedGraph(3, [(0, 1)])
        assert map_score(g, table_ranker(np.zeros((3, 3)))) == 1.0

    def test_in_direction(self):
        g = DirectedGraph(3, [(2, 0)])
        s = np.zeros((3, 3))
        s[1, 0], s[2, 0], s[2, 1] = 1.0, 5.0, 9.0
        assert map_score(g, table_ranker(s), direction="in") == 0.5
        assert map_score(g, table_ranker(s), direction="out") == 1.0

    def test_ap_hand(self):
        assert average_precision(np.array([True, False, True])) == pytest.approx((1 + 2 / 3) / 2)

    @settings(max_examples=30)
    @given(st.integers(0, 10**6), st.floats(-100, 100), st.floats(0.1, 10))
    def test_monotone_invariance(self, seed, shift, factor):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, 8, 0.3)
        if g.n_edges == 0:
            return
        s = rng.random((8, 8))
        base = map_score(g, table_ranker(s))
        assert map_score(g, table_ranker(s + shift)) == base
        assert map_score(g, table_ranker(factor * s**3)) == base

    def test_no_neighbours(self):
        with pytest.raises(EvalError):
            map_score(DirectedGraph(3), table_ranker(np.zeros((3, 3))))

    def test_poincare_ranker(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [0.5, 0.0]])
        assert poincare_ranker(pts)(np.array([0, 0]), np.array([1, 2]))[0] < 0.3
        assert map_score(DirectedGraph(3, [(0, 1), (2, 1)]), poincare_ranker(pts)) == 1.0


class TestSpearman:
    def test_monotone(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_hand(self):
        assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)

    def test_against_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.integers(0, 5, 30)
            y = rng.integers(0, 5, 30)
            assert spearman(x, y) == pytest.approx(spearmanr(x, y).statistic, abs=1e-12)

    def test_errors(self):
        with pytest.raises(EvalError):
            spearman([1, 2], [1, 2, 3])
        with pytest.raises(EvalError):
            spearman([1, 1, 1], [1, 2, 3])

    def test_radius_outdegree(self):
        e = DancarEmbedding(np.zeros((3, 2)), np.zeros((3, 2)), np.array([3.0, 2.0, 1.0]))
        g = DirectedGraph(3, [(0, 1), (0, 2), (1, 2)])
        assert radius_outdegree_spearman(g, e) == pytest.approx(1.0)
