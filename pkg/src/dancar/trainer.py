"""Initialisation, Adam, and the minibatch training loop."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .core import R_MIN, DancarEmbedding, Hyperparams, LossBreakdown, loss_and_gradients
from .graph import DirectedGraph, sample_negative_pairs

logger = logging.getLogger(__name__)

INIT_RADIUS = 0.1


def init_embedding(g: DirectedGraph | int, k: int, seed=0) -> DancarEmbedding:
    """Centers uniform on ``[-1, 1]^k``, radii 0.1, anchors on the centers."""
    if k < 1:
        raise ValueError("dimension must be >= 1")
    n = g if isinstance(g, int) else g.n_nodes
    labels = None if isinstance(g, int) else g.labels
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, size=(n, k))
    return DancarEmbedding(centers.copy(), centers, np.full(n, INIT_RADIUS), labels)


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    alpha: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """One bias-corrected Adam update, applied to ``params`` in place."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in parameter block {name!r}")
        if g.shape != params[name].shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {params[name].shape} for {name!r}")
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for name, g in grads.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        m, v = state.m[name], state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        params[name] -= alpha * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return state


@dataclass
class TrainReport:
    history: list[LossBreakdown]
    epoch_seconds: list[float]
    embedding: DancarEmbedding
    seed: int

    def write_loss_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_loss_log(self.history))


def format_loss_log(history: list[LossBreakdown]) -> str:
    rows = ["iter,l_pos,l_neg,l_anc,total"]
    rows += [f"{i},{h.l_pos!r},{h.l_neg!r},{h.l_anc!r},{h.total!r}" for i, h in enumerate(history)]
    return "\n".join(rows) + "\n"


def train(
    g: DirectedGraph,
    hp: Hyperparams,
    k: int,
    init: DancarEmbedding | None = None,
    log_every: int = 0,
    on_step: Callable[[int, LossBreakdown, DancarEmbedding], None] | None = None,
) -> TrainReport:
    """Fit an embedding of ``g`` in ``R^k`` by minibatch Adam.

    Each iteration uses the full edge set when ``|E| <= b1`` (otherwise ``b1``
    edges drawn with replacement), likewise for the anchor-loss nodes, and
    ``b2`` freshly drawn negative pairs. Radii are clamped to ``R_MIN`` after
    every step. One "epoch" is ``ceil(|E| / b1)`` iterations.

    ``on_step(iteration, loss, embedding)`` is called after each update; it
    must not modify the embedding.
    """
    if g.n_nodes == 0:
        raise ValueError("cannot train on an empty graph")
    rng = np.random.default_rng(hp.seed)
    emb = init.copy() if init is not None else init_embedding(g, k, rng)
    params = {"anchors": emb.anchors, "centers": emb.centers, "radii": emb.radii}
    if hp.baseline == "disk":
        del params["anchors"]
    state = AdamState()

    n, m = g.n_nodes, g.n_edges
    full_edges = g.edges if m and m <= hp.b1 else None
    all_nodes = np.arange(n) if n <= hp.b1 else None
    n_neg_total = n * (n - 1) - (m if hp.negative_mode == "exact" else 0)
    use_neg = n_neg_total > 0
    if not use_neg:
        logger.warning("graph has no negative pairs; negative loss disabled")
    iters_per_epoch = max(1, -(-m // hp.b1))

    history: list[LossBreakdown] = []
    epoch_seconds: list[float] = []
    t0 = time.perf_counter()
    for it in range(hp.iterations):
        if m == 0:
            edge_batch = None
        elif full_edges is not None:
            edge_batch = full_edges
        else:
            edge_batch = g.edges[rng.integers(0, m, size=hp.b1)]
        nodes = all_nodes if all_nodes is not None else rng.integers(0, n, size=hp.b1)
        neg = sample_negative_pairs(g, hp.b2, rng, hp.negative_mode) if use_neg else None

        loss, grads = loss_and_gradients(emb, edge_batch, neg, nodes, hp)
        history.append(loss)
        gd = grads.as_dict()
        adam_step(params, {k_: gd[k_] for k_ in params}, state, hp.adam_alpha, hp.adam_beta1, hp.adam_beta2, hp.adam_eps)
        np.maximum(emb.radii, R_MIN, out=emb.radii)
        if on_step is not None:
            on_step(it, loss, emb)

        if (it + 1) % iters_per_epoch == 0:
            now = time.perf_counter()
            epoch_seconds.append(now - t0)
            t0 = now
        if log_every and (it + 1) % log_every == 0:
            logger.info(
                "iter %d: total=%.6g pos=%.6g neg=%.6g anc=%.6g", it + 1, loss.total, loss.l_pos, loss.l_neg, loss.l_anc
            )
    return TrainReport(history, epoch_seconds, emb, hp.seed)


# -- config files -------------------------------------------------------

# alternate spellings accepted in config files, matching the CLI flags
CONFIG_ALIASES = {"alpha": "adam_alpha", "beta1": "adam_beta1", "beta2": "adam_beta2", "eps": "adam_eps"}
EXTRA_CONFIG_KEYS = {"dim": int, "threads": int}


class ConfigError(ValueError):
    pass


def _coerce(key: str, typ: type, raw: str):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_config(text: str, require_all: bool = True) -> tuple[dict, dict]:
    """Parse ``key = value`` / ``key: value`` / ``key value`` lines.

    Returns ``(hyperparam_values, extras)`` where extras holds ``dim`` and
    ``threads``. With ``require_all`` every Hyperparams field must appear.
    """
    types = Hyperparams.field_types()
    values: dict = {}
    extras: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        for sep in ("=", ":"):
            if sep in s:
                key, raw = (x.strip() for x in s.split(sep, 1))
                break
        else:
            parts = s.split(None, 1)
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, raw = parts
        key = key.replace("-", "_")
        key = CONFIG_ALIASES.get(key, key)
        if key in types:
            values[key] = _coerce(key, types[key], raw)
        elif key in EXTRA_CONFIG_KEYS:
            extras[key] = _coerce(key, EXTRA_CONFIG_KEYS[key], raw)
        else:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
    if require_all:
        missing = [f.name for f in fields(Hyperparams) if f.name not in values]
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(missing)}")
    return values, extras


def format_config(hp: Hyperparams, **extras) -> str:
    lines = [f"{k} = {v}" for k, v in hp.as_dict().items()]
    lines += [f"{k} = {v}" for k, v in extras.items()]
    return "\n".join(lines) + "\n"
