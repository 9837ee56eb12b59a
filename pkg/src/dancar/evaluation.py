"""Reconstruction / link-prediction scores, mean average precision and
Spearman rank correlation."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .core import DancarEmbedding, pair_scores, reconstruct_edges
from .graph import DirectedGraph


class EvalError(ValueError):
    pass


@dataclass
class EvalReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    n_predicted: int
    n_true: int
    map: float | None = None
    spearman: float | None = None

    @classmethod
    def from_counts(cls, tp: int, n_predicted: int, n_true: int) -> "EvalReport":
        fp, fn = n_predicted - tp, n_true - tp
        precision = tp / n_predicted if n_predicted else 0.0
        recall = tp / n_true if n_true else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(tp, fp, fn, precision, recall, f1, n_predicted, n_true)

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())

    def summary_line(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.as_dict().items())


def edge_keys(edges: np.ndarray, n: int) -> np.ndarray:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return np.unique(e[:, 0] * n + e[:, 1])


def compare_edges(predicted: np.ndarray, truth: DirectedGraph) -> EvalReport:
    pk = edge_keys(predicted, truth.n_nodes)
    tp = int(np.intersect1d(pk, truth.edge_keys, assume_unique=True).size)
    return EvalReport.from_counts(tp, len(pk), truth.n_edges)


def _check_nodes(g: DirectedGraph, emb: DancarEmbedding) -> None:
    if g.n_nodes != emb.n_nodes:
        raise EvalError(f"node mismatch: graph has {g.n_nodes} nodes, embedding has {emb.n_nodes}")


def reconstruction_report(
    g: DirectedGraph, emb: DancarEmbedding, *, baseline: str = "dancar", prune: bool = False, threads: int | None = None
) -> EvalReport:
    _check_nodes(g, emb)
    return compare_edges(reconstruct_edges(emb, baseline=baseline, prune=prune, threads=threads), g)


def link_prediction_report(
    full_graph: DirectedGraph,
    train_graph: DirectedGraph,
    emb: DancarEmbedding,
    *,
    baseline: str = "dancar",
    prune: bool = False,
    threads: int | None = None,
) -> EvalReport:
    """Reconstruction of an embedding fit on ``train_graph``, scored against every edge of ``full_graph``."""
    _check_nodes(full_graph, emb)
    if train_graph.n_nodes != full_graph.n_nodes:
        raise EvalError("train and full graphs have different node sets")
    if not np.all(np.isin(train_graph.edge_keys, full_graph.edge_keys)):
        raise EvalError("training edges are not a subset of the full edge set")
    return reconstruction_report(full_graph, emb, baseline=baseline, prune=prune, threads=threads)


Ranker = Callable[[np.ndarray, np.ndarray], np.ndarray]


def dancar_ranker(emb: DancarEmbedding, baseline: str = "dancar") -> Ranker:
    return lambda heads, tails: pair_scores(emb, heads, tails, baseline)


def poincare_ranker(points: np.ndarray) -> Ranker:
    from .analytic import poincare_distance

    pts = np.asarray(points, dtype=np.float64)
    return lambda heads, tails: np.atleast_1d(poincare_distance(pts[heads], pts[tails]))


def average_precision(relevant: np.ndarray) -> float:
    """AP of a ranked list, given its boolean relevance flags in rank order."""
    hits = np.flatnonzero(relevant)
    if not len(hits):
        raise EvalError("no relevant items")
    return float(np.mean(np.arange(1, len(hits) + 1) / (hits + 1)))


def map_score(g: DirectedGraph, ranker: Ranker, direction: str = "out") -> float:
    """Mean average precision of true neighbours when candidates are sorted by
    ascending ``ranker(heads, tails)`` (ties by node id).

    ``direction="out"`` ranks tails ``w`` for each head ``v`` using score
    ``(v, w)``; ``"in"`` ranks heads ``u`` for each tail ``v`` using ``(u, v)``.
    Every ``w != v`` is a candidate.
    """
    if direction not in ("out", "in"):
        raise EvalError("direction must be 'out' or 'in'")
    n = g.n_nodes
    aps = []
    for v in range(n):
        true = g.successors(v) if direction == "out" else g.predecessors(v)
        if not len(true):
            continue
        cand = np.delete(np.arange(n), v)
        vv = np.full(len(cand), v)
        s = np.asarray(ranker(vv, cand) if direction == "out" else ranker(cand, vv), dtype=np.float64)
        order = np.lexsort((cand, s))
        rel = np.isin(cand, true)
        aps.append(average_precision(rel[order]))
    if not aps:
        raise EvalError(f"no node has {direction}-neighbours")
    return float(np.mean(aps))


def spearman(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise EvalError("spearman needs two 1-d sequences of equal length")
    if len(x) < 2:
        raise EvalError("spearman needs at least two observations")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0:
        raise EvalError("spearman undefined for a constant input")
    return float(np.dot(rx, ry) / denom)


def radius_outdegree_spearman(g: DirectedGraph, emb: DancarEmbedding) -> float:
    _check_nodes(g, emb)
    return spearman(emb.radii, g.out_degree())
