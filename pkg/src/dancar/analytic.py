"""Closed-form embeddings: the planar tree layout, Poincare-ball import, and
the doubled bipartite graph whose disk embedding matches a disk-anchor one."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DancarEmbedding
from .graph import DirectedGraph, GraphError


class PoincareDomainError(ValueError):
    pass


@dataclass(frozen=True)
class TreeLayoutConstants:
    n: int
    alpha: float
    p: float
    q: float
    t: float
    k_scale: float


def tree_layout_constants(n: int) -> TreeLayoutConstants:
    """Angles and ratios for laying out trees whose widest node has ``n`` children.

    Children of a disk of radius ``r`` get radius ``t * r`` and sit at
    distance ``k_scale * r`` from its center, spread over angles
    ``alpha, alpha + pi/n, ...`` relative to the parent's direction.
    """
    if n < 1:
        raise ValueError("tree_layout_constants needs n >= 1")
    alpha = -(n - 1) * math.pi / (2 * n)
    p = math.cos(alpha)
    q = math.cos(2 * alpha)
    t = (math.sqrt((p + q) ** 2 + 4 * p) - p + q) / (2 * (q + 1))
    return TreeLayoutConstants(n, alpha, p, q, t, 1.0 / math.sqrt(1.0 + t * t))


def _check_out_tree(tree: DirectedGraph, root: int) -> None:
    n = tree.n_nodes
    if not 0 <= root < n:
        raise GraphError(f"root {root} out of range")
    indeg = tree.in_degree()
    if indeg[root] != 0:
        raise GraphError(f"root {tree.labels[root]!r} has incoming edges")
    bad = np.flatnonzero(indeg != 1)
    bad = bad[bad != root]
    if len(bad):
        raise GraphError(f"not an out-tree: node {tree.labels[bad[0]]!r} has in-degree {indeg[bad[0]]}")
    if tree.n_edges != n - 1:
        raise GraphError("not an out-tree: edge count differs from |V| - 1")


def find_root(tree: DirectedGraph) -> int:
    roots = np.flatnonzero(tree.in_degree() == 0)
    if len(roots) != 1:
        raise GraphError(f"expected exactly one node with in-degree 0, found {len(roots)}")
    return int(roots[0])


def embed_tree(tree: DirectedGraph, root: int | None = None) -> DancarEmbedding:
    """Planar disk-anchor embedding of a directed out-tree.

    Breadth-first from the root (disk of radius 1 at the origin); children are
    visited in ascending id order. Anchors coincide with disk centers.
    """
    if root is None:
        root = find_root(tree)
    _check_out_tree(tree, root)
    n_nodes = tree.n_nodes
    centers = np.zeros((n_nodes, 2))
    radii = np.zeros(n_nodes)
    theta = np.zeros(n_nodes)
    radii[root] = 1.0
    width = int(tree.out_degree().max(initial=0))
    seen = np.zeros(n_nodes, dtype=bool)
    seen[root] = True
    if width:
        c = tree_layout_constants(width)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            phi = c.alpha
            for v in tree.successors(u):
                theta[v] = theta[u] + phi
                centers[v] = centers[u] + radii[u] * c.k_scale * np.array([math.cos(theta[v]), math.sin(theta[v])])
                radii[v] = c.t * radii[u]
                seen[v] = True
                queue.append(int(v))
                phi += math.pi / width
    if not seen.all():
        raise GraphError("not an out-tree: some nodes are unreachable from the root")
    return DancarEmbedding(centers.copy(), centers, radii, tree.labels)


# -- Poincare ball ------------------------------------------------------


def _sqnorm(x: np.ndarray) -> np.ndarray:
    return np.sum(np.square(x), axis=-1)


def _check_ball(*arrays: np.ndarray) -> None:
    for a in arrays:
        if np.any(_sqnorm(a) >= 1.0):
            raise PoincareDomainError("point outside the open unit ball")


def poincare_distance(x, y) -> np.ndarray | float:
    """Hyperbolic distance in the Poincare ball; broadcasts over leading axes."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_ball(x, y)
    arg = 1.0 + 2.0 * _sqnorm(x - y) / ((1.0 - _sqnorm(x)) * (1.0 - _sqnorm(y)))
    d = np.arccosh(arg)
    return float(d) if np.ndim(d) == 0 else d


def poincare_ball_to_euclidean(a, r: float) -> tuple[np.ndarray, float]:
    """Euclidean center and radius of the closed hyperbolic ball ``D_P(a, r)``."""
    a = np.asarray(a, dtype=np.float64)
    _check_ball(a)
    if not r > 0:
        raise PoincareDomainError("hyperbolic radius must be positive")
    na2 = float(_sqnorm(a))
    # (cosh r - 1) / 2 == sinh(r/2)^2, without cancellation for small r
    K = math.sinh(r / 2) ** 2 * (1.0 - na2)
    center = a / (K + 1.0)
    radius = math.sqrt(K / (K + 1.0) * (1.0 - na2 / (K + 1.0)))
    return center, radius


def import_poincare(
    points, eps: float, labels: Sequence[str] | None = None, rtol: float = 1e-12
) -> DancarEmbedding:
    """Disk-anchor embedding reproducing the ``eps``-threshold graph of Poincare points.

    Radii are widened by the relative tolerance ``rtol`` so that pairs at
    hyperbolic distance exactly ``eps`` survive rounding in both directions.
    """
    pts = np.array(points, dtype=np.float64, ndmin=2)
    _check_ball(pts)
    if not eps > 0:
        raise PoincareDomainError("eps must be positive")
    centers = np.empty_like(pts)
    radii = np.empty(len(pts))
    for i, a in enumerate(pts):
        centers[i], radii[i] = poincare_ball_to_euclidean(a, eps)
    radii *= 1.0 + rtol
    return DancarEmbedding(pts.copy(), centers, radii, labels)


def poincare_threshold_graph(points, eps: float, labels: Sequence[str] | None = None) -> DirectedGraph:
    """All ordered pairs at hyperbolic distance ``<= eps`` (brute force)."""
    pts = np.array(points, dtype=np.float64, ndmin=2)
    d = poincare_distance(pts[:, None, :], pts[None, :, :])
    d = np.atleast_2d(d)
    hit = d <= eps
    np.fill_diagonal(hit, False)
    return DirectedGraph(len(pts), np.argwhere(hit), labels)


def parse_poincare_points(text: str) -> tuple[list[str], np.ndarray]:
    labels, rows = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) < 2:
            raise ValueError(f"line {lineno}: expected 'label x1 .. xk'")
        labels.append(tok[0])
        rows.append([float(x) for x in tok[1:]])
    if len({len(r) for r in rows}) > 1:
        raise ValueError("points have inconsistent dimensions")
    return labels, np.asarray(rows, dtype=np.float64)


# -- doubled bipartite graph -----------------------------------------------


def transform_to_bipartite(g: DirectedGraph) -> DirectedGraph:
    """Doubled graph with nodes ``u_0`` (ids ``0..n-1``) and ``u_1`` (ids
    ``n..2n-1``) and edges ``u_0 -> v_1`` for each edge ``u -> v`` and for ``u == v``."""
    n = g.n_nodes
    diag = np.stack([np.arange(n), np.arange(n) + n], axis=1)
    cross = np.stack([g.edges[:, 0], g.edges[:, 1] + n], axis=1)
    labels = [f"{lab}_0" for lab in g.labels] + [f"{lab}_1" for lab in g.labels]
    return DirectedGraph(2 * n, np.concatenate([diag, cross]), labels)
