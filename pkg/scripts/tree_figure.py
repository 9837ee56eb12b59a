"""Closed-form embedding of a perfect m-ary tree, checked and drawn as SVG."""

import argparse

from dancar.analytic import embed_tree, tree_layout_constants
from dancar.evaluation import reconstruction_report
from dancar.graph import DirectedGraph
from dancar.viz import RenderOptions, render_svg


def perfect_tree(m, depth):
    edges, frontier, nxt = [], [0], 1
    for _ in range(depth):
        new = []
        for u in frontier:
            for _ in range(m):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return DirectedGraph(nxt, edges)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--arity", type=int, default=3)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--out", default="tree.svg")
    ap.add_argument("--edges", action="store_true", help="draw edge arrows")
    args = ap.parse_args()

    g = perfect_tree(args.arity, args.depth)
    c = tree_layout_constants(args.arity)
    emb = embed_tree(g)
    rep = reconstruction_report(g, emb)
    print(f"{g.n_nodes} nodes, t={c.t:.5f} k_scale={c.k_scale:.5f}: {rep.summary_line()}")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(render_svg(emb, g, RenderOptions(show_edges=args.edges)))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
