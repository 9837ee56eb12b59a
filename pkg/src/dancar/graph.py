"""Directed graph model, edge-list I/O and the graph transformations used by
the experiments (closure, weak components, edge splits, negative sampling)."""

from __future__ import annotations

import logging
from collections import deque
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"line {lineno}: expected 'head tail', got {line!r}")
        self.lineno = lineno


class CycleError(GraphError):
    def __init__(self, node: int, label: str):
        super().__init__(f"directed cycle through node {label!r} (id {node})")
        self.node = node


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class DirectedGraph:
    """Simple directed graph on dense node ids ``0..n_nodes-1``.

    Edges are stored as a lexicographically sorted ``(m, 2)`` int64 array of
    ``(head, tail)`` pairs, plus CSR-style out/in adjacency. Instances are
    immutable; every transformation returns a new graph.
    """

    __slots__ = (
        "n_nodes",
        "labels",
        "edges",
        "_keys",
        "_out_ptr",
        "_out_idx",
        "_in_ptr",
        "_in_idx",
    )

    def __init__(self, n_nodes: int, edges=(), labels: Sequence[str] | None = None):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise GraphError("n_nodes must be non-negative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n_nodes):
            raise GraphError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise GraphError("self-loops are not allowed")
        keys = e[:, 0] * n_nodes + e[:, 1]
        uniq = np.unique(keys)
        if len(uniq) != len(keys):
            raise GraphError("duplicate edges are not allowed")
        if labels is None:
            labels = [str(i) for i in range(n_nodes)]
        elif len(labels) != n_nodes:
            raise GraphError("label table length differs from node count")
        self.n_nodes = n_nodes
        self.labels = tuple(labels)
        self._keys = _readonly(uniq)
        if n_nodes:
            heads, tails = np.divmod(uniq, n_nodes)
        else:
            heads = tails = np.empty(0, dtype=np.int64)
        self.edges = _readonly(np.stack([heads, tails], axis=1).astype(np.int64))
        self._out_ptr = _readonly(np.concatenate([[0], np.cumsum(np.bincount(heads, minlength=n_nodes))]))
        self._out_idx = _readonly(tails.copy())
        order = np.lexsort((heads, tails))
        self._in_ptr = _readonly(np.concatenate([[0], np.cumsum(np.bincount(tails, minlength=n_nodes))]))
        self._in_idx = _readonly(heads[order])

    @classmethod
    def from_edges(
        cls, n_nodes: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None
    ) -> "DirectedGraph":
        """Build a graph, silently dropping self-loops and duplicate edges."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64).reshape(-1, 2)
        e = e[e[:, 0] != e[:, 1]]
        if len(e):
            e = np.unique(e, axis=0)
        return cls(n_nodes, e, labels)

    # -- basic queries --------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_keys(self) -> np.ndarray:
        """Sorted ``head * n_nodes + tail`` codes, one per edge."""
        return self._keys

    def successors(self, v: int) -> np.ndarray:
        return self._out_idx[self._out_ptr[v] : self._out_ptr[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        return self._in_idx[self._in_ptr[v] : self._in_ptr[v + 1]]

    @property
    def out_adjacency(self) -> list[np.ndarray]:
        return [self.successors(v) for v in range(self.n_nodes)]

    @property
    def in_adjacency(self) -> list[np.ndarray]:
        return [self.predecessors(v) for v in range(self.n_nodes)]

    def out_degree(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self._in_ptr)

    def has_edges(self, heads, tails) -> np.ndarray:
        """Vectorised membership test for pairs ``(heads[i], tails[i])``."""
        keys = np.asarray(heads, dtype=np.int64) * self.n_nodes + np.asarray(tails, dtype=np.int64)
        idx = np.searchsorted(self._keys, keys)
        idx[idx == len(self._keys)] = 0
        return (self._keys[idx] == keys) if len(self._keys) else np.zeros(keys.shape, bool)

    def has_edge(self, v: int, w: int) -> bool:
        return bool(self.has_edges([v], [w])[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def induced_subgraph(self, nodes: Iterable[int]) -> "DirectedGraph":
        """Subgraph on ``nodes`` (ascending order), relabelled densely; labels are carried over."""
        nodes = np.unique(np.asarray(list(nodes), dtype=np.int64))
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        h, t = remap[self.edges[:, 0]], remap[self.edges[:, 1]]
        keep = (h >= 0) & (t >= 0)
        return DirectedGraph(len(nodes), np.stack([h[keep], t[keep]], axis=1), [self.labels[i] for i in nodes])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.labels == other.labels
            and np.array_equal(self._keys, other._keys)
        )

    def __hash__(self):
        return hash((self.n_nodes, self.labels, self._keys.tobytes()))

    def __repr__(self) -> str:
        return f"DirectedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


# -- edge-list I/O ------------------------------------------------------


def parse_edge_list(text: str, labels: Sequence[str] | None = None) -> DirectedGraph:
    """Parse ``head tail`` lines into a graph.

    Labels are interned to ids in first-appearance order. If ``labels`` is
    given, ids follow that table instead and an unknown label is an error;
    this is how an edge list is aligned to an existing embedding. Blank lines
    and lines starting with ``#`` are skipped. Duplicate edges and self-loops
    are dropped and counted in a warning.
    """
    if labels is not None:
        index = {lab: i for i, lab in enumerate(labels)}
        table = list(labels)
        frozen = True
    else:
        index, table, frozen = {}, [], False

    def intern(lab: str, lineno: int) -> int:
        i = index.get(lab)
        if i is None:
            if frozen:
                raise GraphError(f"line {lineno}: unknown node label {lab!r}")
            i = index[lab] = len(table)
            table.append(lab)
        return i

    pairs: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) != 2:
            raise EdgeListParseError(lineno, line)
        pairs.append((intern(tok[0], lineno), intern(tok[1], lineno)))

    n_self = sum(1 for a, b in pairs if a == b)
    distinct = {p for p in pairs if p[0] != p[1]}
    n_dup = len(pairs) - n_self - len(distinct)
    if n_self or n_dup:
        logger.warning("edge list: dropped %d duplicate edge(s) and %d self-loop(s)", n_dup, n_self)
    g = DirectedGraph.from_edges(len(table), sorted(distinct), table)
    return g


def read_edge_list(path, labels: Sequence[str] | None = None) -> DirectedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), labels)


def format_edge_list(g: DirectedGraph) -> str:
    lab = g.labels
    return "".join(f"{lab[a]} {lab[b]}\n" for a, b in g.edges)


def write_edge_list(g: DirectedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))


# -- transformations ----------------------------------------------------


def topological_order(g: DirectedGraph) -> np.ndarray:
    """Kahn order; raises CycleError naming a node that lies on a cycle."""
    indeg = g.in_degree().copy()
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in g.successors(u):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(int(w))
    if len(order) < g.n_nodes:
        # every leftover node keeps a leftover predecessor; walking backwards must revisit
        seen = set()
        v = int(np.flatnonzero(indeg > 0)[0])
        while v not in seen:
            seen.add(v)
            v = int(next(p for p in g.predecessors(v) if indeg[p] > 0))
        raise CycleError(v, g.labels[v])
    return np.asarray(order, dtype=np.int64)


def transitive_closure(g: DirectedGraph) -> DirectedGraph:
    """Closure of a DAG: ``(u, w)`` for every directed path ``u -> ... -> w``."""
    order = topological_order(g)
    desc: list[set[int] | None] = [None] * g.n_nodes
    for u in order[::-1]:
        s: set[int] = set()
        for w in g.successors(u):
            w = int(w)
            s.add(w)
            s |= desc[w]
        desc[u] = s
    edges = [(u, w) for u in range(g.n_nodes) for w in desc[u]]
    return DirectedGraph(g.n_nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2), g.labels)


def largest_weakly_connected_component(g: DirectedGraph) -> DirectedGraph:
    """Induced subgraph on the largest weak component; ties go to the
    component holding the smallest node id."""
    if g.n_nodes == 0:
        return g
    adj = coo_matrix(
        (np.ones(g.n_edges), (g.edges[:, 0], g.edges[:, 1])), shape=(g.n_nodes, g.n_nodes)
    )
    _, comp = connected_components(adj, directed=True, connection="weak")
    sizes = np.bincount(comp)
    best = sizes.max()
    # labels from connected_components are not ordered by min id; pick explicitly
    first_node = {}
    for v, c in enumerate(comp):
        first_node.setdefault(int(c), v)
    winner = min((first_node[c], c) for c in np.flatnonzero(sizes == best))[1]
    return g.induced_subgraph(np.flatnonzero(comp == winner))


def split_edges(
    g: DirectedGraph, train_fraction: float, rng_seed: int
) -> tuple[DirectedGraph, np.ndarray]:
    """Random train/held-out partition of the edge set.

    The training graph keeps every node. Returns ``(train, held_out)`` where
    ``held_out`` is a sorted ``(h, 2)`` edge array.
    """
    if not 0.0 < train_fraction <= 1.0:
        raise GraphError("train_fraction must lie in (0, 1]")
    m = g.n_edges
    n_train = int(np.floor(train_fraction * m + 0.5))
    perm = np.random.default_rng(rng_seed).permutation(m)
    train_idx = np.sort(perm[:n_train])
    held_idx = np.sort(perm[n_train:])
    train = DirectedGraph(g.n_nodes, g.edges[train_idx], g.labels)
    return train, g.edges[held_idx].copy()


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_negative_pairs(
    g: DirectedGraph, count: int, rng=None, mode: str = "exact"
) -> np.ndarray:
    """Sample ``count`` ordered pairs ``(v, w)``, ``v != w``, uniformly.

    ``exact`` draws from the non-edges only (rejection sampling, or direct
    enumeration of the complement when the graph is denser than 1/2).
    ``approximate`` draws from all ordered pairs and may return edges.
    Returns a ``(count, 2)`` int64 array.
    """
    rng = _as_rng(rng)
    n = g.n_nodes
    total = n * (n - 1)
    if mode not in ("exact", "approximate"):
        raise GraphError(f"unknown negative sampling mode {mode!r}")
    if total == 0:
        raise GraphError("no negative pairs")

    def draw(size: int) -> np.ndarray:
        v = rng.integers(0, n, size=size)
        w = rng.integers(0, n - 1, size=size)
        w = w + (w >= v)
        return np.stack([v, w], axis=1)

    if mode == "approximate":
        return draw(count)

    n_neg = total - g.n_edges
    if n_neg <= 0:
        raise GraphError("no negative pairs")
    if g.n_edges > 0.5 * total:
        v, w = np.divmod(np.arange(n * n, dtype=np.int64), n)
        cand = np.stack([v, w], axis=1)[v != w]
        cand = cand[~g.has_edges(cand[:, 0], cand[:, 1])]
        return cand[rng.integers(0, len(cand), size=count)]

    out = np.empty((0, 2), dtype=np.int64)
    while len(out) < count:
        need = count - len(out)
        # oversample by the expected rejection rate
        batch = draw(int(need * total / n_neg) + 8)
        batch = batch[~g.has_edges(batch[:, 0], batch[:, 1])]
        out = np.concatenate([out, batch[:need]])
    return out


def random_dag(n: int, seed=0, extra_parent_p: float = 0.2) -> DirectedGraph:
    """Random hierarchy: node ``j > 0`` gets one parent among ``0..j-1`` and,
    with probability ``extra_parent_p``, a second one."""
    rng = _as_rng(seed)
    edges = set()
    for j in range(1, n):
        edges.add((int(rng.integers(0, j)), j))
        if j > 1 and rng.random() < extra_parent_p:
            edges.add((int(rng.integers(0, j)), j))
    return DirectedGraph(n, sorted(edges))
