"""Static SVG drawings of planar embeddings: one circle per disk, a dot per
anchor, optional arrows from each disk center to the anchors it holds."""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

import numpy as np

from .core import DancarEmbedding
from .graph import DirectedGraph


class VizError(ValueError):
    pass


@dataclass
class RenderOptions:
    show_edges: bool = True
    highlight_nodes: frozenset[int] = field(default_factory=frozenset)
    stroke_width: float = 1.0
    canvas_px: int = 800
    anchor_px: float = 2.5
    padding: float = 0.05


def _num(x: float) -> str:
    return f"{x:.3f}"


def render_svg(emb: DancarEmbedding, g: DirectedGraph | None = None, options: RenderOptions | None = None) -> str:
    if emb.dim != 2:
        raise VizError("visualization requires 2-dimensional embedding")
    opt = options or RenderOptions()
    size = opt.canvas_px
    n = emb.n_nodes
    if g is not None and g.n_nodes != n:
        raise VizError("graph and embedding have different node counts")

    if n:
        lo = np.minimum((emb.centers - emb.radii[:, None]).min(axis=0), emb.anchors.min(axis=0))
        hi = np.maximum((emb.centers + emb.radii[:, None]).max(axis=0), emb.anchors.max(axis=0))
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = float(max(hi - lo)) or 1.0
    pad = opt.padding * span
    lo = lo - pad
    scale = size / (span + 2 * pad)

    def px(p: np.ndarray) -> tuple[float, float]:
        # SVG y grows downward
        return (p[0] - lo[0]) * scale, size - (p[1] - lo[1]) * scale

    sw = opt.stroke_width
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        "<defs>"
        '<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" orient="auto">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker>'
        "</defs>",
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]

    # largest disks first so small ones stay visible
    out.append('<g class="disks" fill="steelblue" fill-opacity="0.08">')
    for v in np.argsort(-emb.radii, kind="stable"):
        x, y = px(emb.centers[v])
        hl = v in opt.highlight_nodes
        stroke = "crimson" if hl else "steelblue"
        out.append(
            f'<circle class="disk" data-node={quoteattr(emb.labels[v])} cx="{_num(x)}" cy="{_num(y)}" '
            f'r="{max(emb.radii[v] * scale, 1e-3):.6g}" stroke="{stroke}" stroke-width="{_num(sw * (2 if hl else 1))}"/>'
        )
    out.append("</g>")

    if opt.show_edges and g is not None and g.n_edges:
        out.append(f'<g class="edges" stroke="#555" stroke-width="{_num(sw * 0.5)}" marker-end="url(#arrow)">')
        for v, w in g.edges:
            x1, y1 = px(emb.centers[v])
            x2, y2 = px(emb.anchors[w])
            out.append(f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}"/>')
        out.append("</g>")

    a = opt.anchor_px
    out.append('<g class="anchors">')
    for v in range(n):
        x, y = px(emb.anchors[v])
        fill = "crimson" if v in opt.highlight_nodes else "black"
        out.append(
            f'<path class="anchor" data-node={quoteattr(emb.labels[v])} fill="{fill}" '
            f'd="M {_num(x - a)} {_num(y)} a {a} {a} 0 1 0 {2 * a} 0 a {a} {a} 0 1 0 {-2 * a} 0 z"/>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
