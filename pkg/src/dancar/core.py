"""Disk-anchor embeddings: containment scoring, edge reconstruction, the
margin losses and their analytic gradients.

Every node ``v`` carries an anchor ``x_v``, a disk center ``c_v`` and a disk
radius ``r_v``. The edge ``(v, w)`` is reconstructed when ``x_w`` lies in the
closed disk ``D(c_v, r_v)``. The disk-inclusion baseline (``baseline="disk"``)
ignores anchors and reconstructs ``(u, v)`` when ``D(c_u, r_u)`` lies inside
``D(c_v, r_v)``.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

R_MIN = 1e-6
BASELINES = ("dancar", "disk")
NEGATIVE_MODES = ("exact", "approximate")


class EmbeddingError(ValueError):
    pass


@dataclass
class DancarEmbedding:
    anchors: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.anchors = np.array(self.anchors, dtype=np.float64, ndmin=2)
        self.centers = np.array(self.centers, dtype=np.float64, ndmin=2)
        self.radii = np.array(self.radii, dtype=np.float64).reshape(-1)
        n = len(self.radii)
        if n == 0:
            k = max(self.anchors.shape[-1], self.centers.shape[-1], 1)
            self.anchors = self.anchors.reshape(0, k)
            self.centers = self.centers.reshape(0, k)
        if self.anchors.shape != self.centers.shape or self.anchors.shape[0] != n:
            raise EmbeddingError(
                f"shape mismatch: anchors {self.anchors.shape}, centers {self.centers.shape}, radii {self.radii.shape}"
            )
        if self.labels is None:
            self.labels = tuple(str(i) for i in range(n))
        else:
            self.labels = tuple(self.labels)
            if len(self.labels) != n:
                raise EmbeddingError("label table length differs from node count")

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    @property
    def n_nodes(self) -> int:
        return len(self.radii)

    def copy(self) -> "DancarEmbedding":
        return DancarEmbedding(self.anchors.copy(), self.centers.copy(), self.radii.copy(), self.labels)

    def check(self, r_min: float = R_MIN) -> None:
        """Raise if any value is non-finite or a radius is below ``r_min``."""
        for name in ("anchors", "centers", "radii"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise EmbeddingError(f"non-finite values in {name}")
        if self.n_nodes and self.radii.min() < r_min:
            raise EmbeddingError(f"radius below r_min={r_min}")

    def __eq__(self, other):
        if not isinstance(other, DancarEmbedding):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.anchors, other.anchors)
            and np.array_equal(self.centers, other.centers)
            and np.array_equal(self.radii, other.radii)
        )


@dataclass
class Hyperparams:
    margin: float = 0.01
    lambda_neg: float = 8.0
    lambda_anc: float = 1.0
    b1: int = 10_000
    b2: int = 100_000
    adam_alpha: float = 0.05
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    iterations: int = 1000
    seed: int = 0
    negative_mode: str = "exact"
    baseline: str = "dancar"

    def __post_init__(self):
        if self.margin < 0 or self.lambda_neg < 0 or self.lambda_anc < 0:
            raise ValueError("margin and loss weights must be non-negative")
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("batch sizes must be >= 1")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.adam_alpha <= 0:
            raise ValueError("adam_alpha must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.negative_mode not in NEGATIVE_MODES:
            raise ValueError(f"negative_mode must be one of {NEGATIVE_MODES}")
        if self.baseline not in BASELINES:
            raise ValueError(f"baseline must be one of {BASELINES}")

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: type(f.default) for f in fields(cls)}

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LossBreakdown:
    l_pos: float
    l_neg: float
    l_anc: float
    total: float


@dataclass
class Gradients:
    anchors: np.ndarray
    centers: np.ndarray
    radii: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"anchors": self.anchors, "centers": self.centers, "radii": self.radii}


# -- distances and scores ----------------------------------------------


def _distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # coordinate-wise accumulation keeps results bit-identical for any batch shape
    acc = np.square(a[..., 0] - b[..., 0])
    for i in range(1, a.shape[-1]):
        acc = acc + np.square(a[..., i] - b[..., i])
    return np.sqrt(acc)


def _pairs(pairs) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return p[:, 0], p[:, 1]


def _check_distinct(v: int, w: int) -> None:
    if v == w:
        raise EmbeddingError(f"score undefined for identical nodes ({v}, {v})")


def dancar_scores(emb: DancarEmbedding, heads, tails) -> np.ndarray:
    heads = np.asarray(heads, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    return (_distance(emb.centers[heads], emb.anchors[tails]) + 0.0) - emb.radii[heads]


def disk_scores(emb: DancarEmbedding, us, vs) -> np.ndarray:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    return (_distance(emb.centers[vs], emb.centers[us]) + emb.radii[us]) - emb.radii[vs]


def score(emb: DancarEmbedding, v: int, w: int) -> float:
    """Signed containment margin ``|c_v - x_w| - r_v``; ``<= 0`` means ``x_w`` is in v's disk."""
    _check_distinct(v, w)
    return float(dancar_scores(emb, [v], [w])[0])


def disk_embedding_score(emb: DancarEmbedding, u: int, v: int) -> float:
    """``|c_u - c_v| + r_u - r_v``; ``<= 0`` iff disk u lies inside disk v."""
    _check_distinct(u, v)
    return float(disk_scores(emb, [u], [v])[0])


def pair_scores(emb: DancarEmbedding, heads, tails, baseline: str = "dancar") -> np.ndarray:
    if baseline == "dancar":
        return dancar_scores(emb, heads, tails)
    if baseline == "disk":
        return disk_scores(emb, heads, tails)
    raise ValueError(f"unknown baseline {baseline!r}")


# -- reconstruction ----------------------------------------------------


def _scan_brute(q, qr, p, poff, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = (_distance(q[rows][:, None, :], p[None, :, :]) + poff[None, :]) - qr[rows][:, None]
    hit = s <= 0
    hit[np.arange(len(rows)), rows] = False
    r, c = np.nonzero(hit)
    return rows[r], c


class _Grid:
    """Uniform grid over the first few coordinates of the target points.

    A target can only be contained in a query disk of radius ``r`` if each of
    its coordinates lies within ``r`` of the disk center, so only cells
    meeting that box need scanning. Cell width is the largest radius.
    """

    def __init__(self, points: np.ndarray, cell: float, n_axes: int = 3):
        self.axes = min(n_axes, points.shape[1])
        self.cell = cell
        sub = points[:, : self.axes]
        self.origin = sub.min(axis=0) if len(sub) else np.zeros(self.axes)
        idx = np.floor((sub - self.origin) / cell).astype(np.int64)
        self.buckets: dict[tuple, np.ndarray] = {}
        order = np.lexsort(idx.T[::-1]) if len(idx) else np.empty(0, np.int64)
        keys = [tuple(row) for row in idx[order]]
        for key, grp in itertools.groupby(range(len(order)), key=lambda i: keys[i]):
            self.buckets[key] = order[list(grp)]

    def candidates(self, center: np.ndarray, radius: float) -> np.ndarray:
        c = center[: self.axes]
        slack = 1e-9 * (self.cell + float(np.abs(c).max(initial=0.0)))
        lo = np.floor((c - radius - slack - self.origin) / self.cell).astype(np.int64)
        hi = np.floor((c + radius + slack - self.origin) / self.cell).astype(np.int64)
        found = [
            self.buckets[key]
            for key in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
            if key in self.buckets
        ]
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(found))


def _scan_pruned(q, qr, p, poff, rows, grid: _Grid) -> tuple[np.ndarray, np.ndarray]:
    out_r, out_c = [], []
    for v in rows:
        cand = grid.candidates(q[v], qr[v])
        cand = cand[cand != v]
        if not len(cand):
            continue
        s = (_distance(q[np.full(len(cand), v)], p[cand]) + poff[cand]) - qr[np.full(len(cand), v)]
        hit = cand[s <= 0]
        out_r.append(np.full(len(hit), v, dtype=np.int64))
        out_c.append(hit)
    if not out_r:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(out_r), np.concatenate(out_c)


def reconstruct_edges(
    emb: DancarEmbedding,
    pairs=None,
    *,
    baseline: str = "dancar",
    prune: bool = False,
    threads: int | None = None,
    chunk_size: int | None = None,
) -> np.ndarray:
    """Edges ``(v, w)``, ``v != w``, whose score is ``<= 0``.

    With ``pairs=None`` all ordered pairs are scanned in chunks of source
    rows, optionally on a thread pool; ``prune=True`` restricts each row to
    grid cells that can hold a contained point and yields the same edges
    bit for bit. Returns a lexicographically sorted ``(m, 2)`` int64 array
    (for explicit ``pairs``, the qualifying pairs in input order).
    """
    if baseline not in BASELINES:
        raise ValueError(f"unknown baseline {baseline!r}")
    if pairs is not None:
        h, t = _pairs(pairs)
        keep = h != t
        h, t = h[keep], t[keep]
        hit = pair_scores(emb, h, t, baseline) <= 0
        return np.stack([h[hit], t[hit]], axis=1)

    n = emb.n_nodes
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    # rows are the disks doing the containing
    q, qr = emb.centers, emb.radii
    if baseline == "dancar":
        p, poff = emb.anchors, np.zeros(n)
    else:
        p, poff = emb.centers, emb.radii

    if chunk_size is None:
        chunk_size = max(1, min(n, 4_000_000 // max(n, 1)))
    chunks = [np.arange(i, min(i + chunk_size, n)) for i in range(0, n, chunk_size)]
    if prune:
        grid = _Grid(p, float(qr.max()))
        work = lambda rows: _scan_pruned(q, qr, p, poff, rows, grid)  # noqa: E731
    else:
        work = lambda rows: _scan_brute(q, qr, p, poff, rows)  # noqa: E731

    if threads and threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    rows = np.concatenate([a for a, _ in parts]) if parts else np.empty(0, np.int64)
    cols = np.concatenate([b for _, b in parts]) if parts else np.empty(0, np.int64)
    if baseline == "dancar":
        edges = np.stack([rows, cols], axis=1)
    else:
        edges = np.stack([cols, rows], axis=1)
    if len(edges):
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return edges.astype(np.int64).reshape(-1, 2)


# -- losses ------------------------------------------------------------


def _relu_mean(pre: np.ndarray) -> float:
    return float(np.mean(np.maximum(pre, 0.0)))


def _nonempty(batch, what: str) -> np.ndarray:
    a = np.asarray(batch, dtype=np.int64)
    if a.size == 0:
        raise EmbeddingError(f"empty {what} batch")
    return a


def _pos_pre(emb, h, t, margin, baseline):
    return pair_scores(emb, h, t, baseline) + margin


def _neg_pre(emb, h, t, margin, baseline):
    return -pair_scores(emb, h, t, baseline) + margin


def _anc_pre(emb, nodes, margin):
    return (_distance(emb.centers[nodes], emb.anchors[nodes]) - emb.radii[nodes]) + margin


def positive_loss(emb: DancarEmbedding, edge_batch, margin: float, baseline: str = "dancar") -> float:
    """Mean of ``relu(|c_v - x_w| - r_v + margin)`` over the edge batch."""
    h, t = _pairs(_nonempty(edge_batch, "edge"))
    return _relu_mean(_pos_pre(emb, h, t, margin, baseline))


def negative_loss(emb: DancarEmbedding, pair_batch, margin: float, baseline: str = "dancar") -> float:
    """Mean of ``relu(r_v - |c_v - x_w| + margin)`` over the non-edge batch."""
    h, t = _pairs(_nonempty(pair_batch, "negative"))
    if np.any(h == t):
        raise EmbeddingError("negative batch contains a pair (v, v)")
    return _relu_mean(_neg_pre(emb, h, t, margin, baseline))


def anchor_loss(emb: DancarEmbedding, node_batch, margin: float) -> float:
    """Mean of ``relu(|c_v - x_v| - r_v + margin)`` over the node batch."""
    nodes = _nonempty(node_batch, "node").reshape(-1)
    return _relu_mean(_anc_pre(emb, nodes, margin))


def _scatter(idx: np.ndarray, vals: np.ndarray, n: int) -> np.ndarray:
    if vals.ndim == 1:
        return np.bincount(idx, weights=vals, minlength=n)
    return np.stack([np.bincount(idx, weights=vals[:, i], minlength=n) for i in range(vals.shape[1])], axis=1)


def _unit(diff: np.ndarray, d: np.ndarray) -> np.ndarray:
    u = np.zeros_like(diff)
    ok = d > 0
    u[ok] = diff[ok] / d[ok, None]
    return u


def _accumulate_pairs(emb, grads: Gradients, h, t, pre, sign, weight, baseline):
    """Add the gradient of ``weight * mean(relu(pre))`` where
    ``pre = sign * score(h, t) + margin``."""
    act = pre > 0
    if not np.any(act):
        return
    h, t = h[act], t[act]
    coef = sign * weight / len(pre)
    n = emb.n_nodes
    if baseline == "dancar":
        diff = emb.centers[h] - emb.anchors[t]
        u = _unit(diff, _distance(emb.centers[h], emb.anchors[t])) * coef
        grads.centers += _scatter(h, u, n)
        grads.anchors -= _scatter(t, u, n)
        grads.radii -= _scatter(h, np.full(len(h), coef), n)
    else:
        diff = emb.centers[h] - emb.centers[t]
        u = _unit(diff, _distance(emb.centers[t], emb.centers[h])) * coef
        grads.centers += _scatter(h, u, n)
        grads.centers -= _scatter(t, u, n)
        grads.radii += _scatter(h, np.full(len(h), coef), n)
        grads.radii -= _scatter(t, np.full(len(h), coef), n)


def loss_and_gradients(
    emb: DancarEmbedding, edge_batch, negative_batch, node_batch, hp: Hyperparams
) -> tuple[LossBreakdown, Gradients]:
    """Batch loss breakdown and its exact gradient.

    A batch given as ``None`` drops that term (its component is reported as
    0); an empty array is an error. The ReLU derivative at 0 is taken as 0 and
    a coincident center/point pair contributes no direction.
    """
    return _evaluate(emb, edge_batch, negative_batch, node_batch, hp, True)


def _evaluate(emb, edge_batch, negative_batch, node_batch, hp, need_grad):
    baseline = hp.baseline
    mu = hp.margin
    grads = Gradients(np.zeros_like(emb.anchors), np.zeros_like(emb.centers), np.zeros_like(emb.radii)) if need_grad else None
    l_pos = l_neg = l_anc = 0.0

    if edge_batch is not None:
        h, t = _pairs(_nonempty(edge_batch, "edge"))
        pre = _pos_pre(emb, h, t, mu, baseline)
        l_pos = _relu_mean(pre)
        if need_grad:
            _accumulate_pairs(emb, grads, h, t, pre, 1.0, 1.0, baseline)

    if negative_batch is not None:
        h, t = _pairs(_nonempty(negative_batch, "negative"))
        if np.any(h == t):
            raise EmbeddingError("negative batch contains a pair (v, v)")
        pre = _neg_pre(emb, h, t, mu, baseline)
        l_neg = _relu_mean(pre)
        if need_grad and hp.lambda_neg:
            _accumulate_pairs(emb, grads, h, t, pre, -1.0, hp.lambda_neg, baseline)

    lam_anc = hp.lambda_anc if baseline == "dancar" else 0.0
    if node_batch is not None and baseline == "dancar":
        nodes = _nonempty(node_batch, "node").reshape(-1)
        pre = _anc_pre(emb, nodes, mu)
        l_anc = _relu_mean(pre)
        if need_grad and lam_anc:
            act = pre > 0
            v = nodes[act]
            if len(v):
                coef = lam_anc / len(nodes)
                u = _unit(emb.centers[v] - emb.anchors[v], _distance(emb.centers[v], emb.anchors[v])) * coef
                n = emb.n_nodes
                grads.centers += _scatter(v, u, n)
                grads.anchors -= _scatter(v, u, n)
                grads.radii -= _scatter(v, np.full(len(v), coef), n)

    total = l_pos + hp.lambda_neg * l_neg + lam_anc * l_anc
    return LossBreakdown(l_pos, l_neg, l_anc, total), grads


def total_loss(emb: DancarEmbedding, edge_batch, negative_batch, node_batch, hp: Hyperparams) -> LossBreakdown:
    return _evaluate(emb, edge_batch, negative_batch, node_batch, hp, False)[0]


def loss_gradients(emb: DancarEmbedding, edge_batch, negative_batch, node_batch, hp: Hyperparams) -> Gradients:
    return loss_and_gradients(emb, edge_batch, negative_batch, node_batch, hp)[1]


# -- embedding file I/O -------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_embedding(emb: DancarEmbedding) -> str:
    lines = [f"dancar {emb.dim} {emb.n_nodes}"]
    for i, lab in enumerate(emb.labels):
        vals = itertools.chain(emb.anchors[i], emb.centers[i], (emb.radii[i],))
        lines.append(" ".join([lab, *map(_fmt, vals)]))
    return "\n".join(lines) + "\n"


def parse_embedding(text: str) -> DancarEmbedding:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmbeddingError("empty embedding file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "dancar":
        raise EmbeddingError(f"bad header {lines[0]!r}; expected 'dancar <k> <n>'")
    k, n = int(head[1]), int(head[2])
    if len(lines) - 1 != n:
        raise EmbeddingError(f"header announces {n} nodes, found {len(lines) - 1}")
    labels, rows = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        tok = ln.split()
        if len(tok) != 2 * k + 2:
            raise EmbeddingError(f"line {lineno}: expected {2 * k + 2} fields, got {len(tok)}")
        labels.append(tok[0])
        rows.append([float(x) for x in tok[1:]])
    a = np.asarray(rows, dtype=np.float64).reshape(n, 2 * k + 1)
    return DancarEmbedding(a[:, :k], a[:, k : 2 * k], a[:, 2 * k], labels)


def write_embedding(emb: DancarEmbedding, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_embedding(emb))


def read_embedding(path) -> DancarEmbedding:
    with open(path, encoding="utf-8") as fh:
        return parse_embedding(fh.read())


def embedding_from_labels(emb: DancarEmbedding, labels: Sequence[str]) -> DancarEmbedding:
    """Reorder ``emb`` so its rows follow ``labels``."""
    index = {lab: i for i, lab in enumerate(emb.labels)}
    missing = [lab for lab in labels if lab not in index]
    if missing:
        raise EmbeddingError(f"embedding lacks node(s) {missing[:5]}")
    idx = np.asarray([index[lab] for lab in labels], dtype=np.int64)
    return DancarEmbedding(emb.anchors[idx], emb.centers[idx], emb.radii[idx], tuple(labels))
