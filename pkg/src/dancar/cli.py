"""``dancar`` command line: train, eval, tree-embed, import-poincare,
transform-bipartite, render, plus small graph utilities."""

from __future__ import annotations

import argparse
import logging
import sys

from . import analytic, core, evaluation, graph, trainer, viz

log = logging.getLogger("dancar")

# CLI flag -> Hyperparams field
HP_FLAGS = {
    "seed": "seed",
    "iterations": "iterations",
    "margin": "margin",
    "lambda_neg": "lambda_neg",
    "lambda_anc": "lambda_anc",
    "b1": "b1",
    "b2": "b2",
    "alpha": "adam_alpha",
    "beta1": "adam_beta1",
    "beta2": "adam_beta2",
    "eps": "adam_eps",
    "negative_mode": "negative_mode",
    "baseline": "baseline",
}


def _add_hp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; must set every hyperparameter")
    p.add_argument("--dim", type=int, help="embedding dimension (default 2)")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("--lambda-neg", type=float)
    p.add_argument("--lambda-anc", type=float)
    p.add_argument("--b1", type=int)
    p.add_argument("--b2", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--negative-mode", choices=core.NEGATIVE_MODES)
    p.add_argument("--baseline", choices=core.BASELINES)


def _threads_flag(p):
    p.add_argument("--threads", type=int, default=None, help="worker cap for all-pairs scans")


def resolve_hyperparams(args) -> tuple[core.Hyperparams, int, int | None]:
    values: dict = {}
    extras: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values, extras = trainer.parse_config(fh.read())
    for flag, name in HP_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    dim = args.dim if args.dim is not None else extras.get("dim", 2)
    threads = args.threads if args.threads is not None else extras.get("threads")
    return core.Hyperparams(**values), dim, threads


def cmd_train(args) -> int:
    hp, dim, threads = resolve_hyperparams(args)
    vocab = None
    if args.nodes_from:
        vocab = graph.read_edge_list(args.nodes_from).labels
    g = graph.read_edge_list(args.edges, labels=vocab)
    log.info("training on %d nodes / %d edges, dim=%d", g.n_nodes, g.n_edges, dim)
    report = trainer.train(g, hp, dim, log_every=args.log_every)
    core.write_embedding(report.embedding, args.out)
    if args.log:
        report.write_loss_log(args.log)
    ev = evaluation.reconstruction_report(g, report.embedding, baseline=hp.baseline, threads=threads)
    print(ev.summary_line())
    return 0


def _load_aligned(edges_path, emb_path):
    emb = core.read_embedding(emb_path)
    try:
        g = graph.read_edge_list(edges_path, labels=emb.labels)
    except graph.GraphError as exc:
        raise evaluation.EvalError(f"node mismatch: {exc}") from None
    return g, emb


def cmd_eval(args) -> int:
    g, emb = _load_aligned(args.edges, args.embedding)
    if args.mode == "linkpred":
        if not args.full:
            print("usage error: --mode linkpred requires --full FULL_EDGE_LIST", file=sys.stderr)
            return 2
        full, _ = _load_aligned(args.full, args.embedding)
        rep = evaluation.link_prediction_report(full, g, emb, baseline=args.baseline, threads=args.threads, prune=args.prune)
        target = full
    else:
        rep = evaluation.reconstruction_report(g, emb, baseline=args.baseline, threads=args.threads, prune=args.prune)
        target = g
    if args.map:
        rep.map = evaluation.map_score(target, evaluation.dancar_ranker(emb, args.baseline), args.map_direction)
    if args.spearman:
        rep.spearman = evaluation.radius_outdegree_spearman(target, emb)
    print(rep.summary_line())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(rep.to_text())
    return 0


def cmd_tree_embed(args) -> int:
    g = graph.read_edge_list(args.edges)
    root = None
    if args.root is not None:
        idx = g.label_index()
        if args.root not in idx:
            raise graph.GraphError(f"root label {args.root!r} not in graph")
        root = idx[args.root]
    emb = analytic.embed_tree(g, root)
    core.write_embedding(emb, args.out)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(viz.render_svg(emb, g, viz.RenderOptions(show_edges=False)))
    return 0


def cmd_import_poincare(args) -> int:
    with open(args.points, encoding="utf-8") as fh:
        labels, pts = analytic.parse_poincare_points(fh.read())
    emb = analytic.import_poincare(pts, args.eps, labels)
    core.write_embedding(emb, args.out)
    if args.threshold_graph:
        graph.write_edge_list(analytic.poincare_threshold_graph(pts, args.eps, labels), args.threshold_graph)
    return 0


def cmd_transform_bipartite(args) -> int:
    graph.write_edge_list(analytic.transform_to_bipartite(graph.read_edge_list(args.input)), args.output)
    return 0


def cmd_render(args) -> int:
    emb = core.read_embedding(args.embedding)
    g = None
    if args.edges:
        g, emb = _load_aligned(args.edges, args.embedding)
    hl = set()
    if args.highlight:
        idx = {lab: i for i, lab in enumerate(emb.labels)}
        hl = {idx[lab] for lab in args.highlight if lab in idx}
    opts = viz.RenderOptions(
        show_edges=not args.no_edges,
        highlight_nodes=frozenset(hl),
        stroke_width=args.stroke_width,
        canvas_px=args.canvas_px,
    )
    svg = viz.render_svg(emb, g, opts)
    if args.output == "-":
        sys.stdout.write(svg)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return 0


def cmd_closure(args) -> int:
    graph.write_edge_list(graph.transitive_closure(graph.read_edge_list(args.input)), args.output)
    return 0


def cmd_wcc(args) -> int:
    graph.write_edge_list(graph.largest_weakly_connected_component(graph.read_edge_list(args.input)), args.output)
    return 0


def cmd_split(args) -> int:
    g = graph.read_edge_list(args.input)
    train_g, held = graph.split_edges(g, args.fraction, args.seed)
    graph.write_edge_list(train_g, args.train_out)
    if args.held_out:
        graph.write_edge_list(graph.DirectedGraph(g.n_nodes, held, g.labels), args.held_out)
    return 0


def cmd_default_config(args) -> int:
    text = trainer.format_config(core.Hyperparams(), dim=2)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dancar", description="Disk-anchor embeddings of directed graphs")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit an embedding to an edge list")
    p.add_argument("edges")
    p.add_argument("--out", required=True, help="embedding file to write")
    p.add_argument("--log", help="CSV loss log to write")
    p.add_argument("--nodes-from", help="edge list whose labels define the node set (for link prediction)")
    p.add_argument("--log-every", type=int, default=0)
    _add_hp_flags(p)
    _threads_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score an embedding against an edge list")
    p.add_argument("edges", help="graph the embedding was trained on")
    p.add_argument("embedding")
    p.add_argument("--mode", choices=("reconstruct", "linkpred"), default="reconstruct")
    p.add_argument("--full", help="full edge list (linkpred mode)")
    p.add_argument("--map", action="store_true", help="also report mean average precision")
    p.add_argument("--map-direction", choices=("out", "in"), default="out")
    p.add_argument("--spearman", action="store_true", help="radius / out-degree rank correlation")
    p.add_argument("--baseline", choices=core.BASELINES, default="dancar")
    p.add_argument("--prune", action="store_true", help="grid pruning for the all-pairs scan")
    p.add_argument("--report", help="also write key=value report to this path")
    p.add_argument("--seed", type=int, help="accepted for uniformity; evaluation is deterministic")
    _threads_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tree-embed", help="closed-form planar embedding of an out-tree")
    p.add_argument("edges")
    p.add_argument("--root", help="root label (default: the unique source)")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_tree_embed)

    p = sub.add_parser("import-poincare", help="convert Poincare-ball points to an embedding")
    p.add_argument("points")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold-graph", help="also write the brute-force eps-threshold edge list")
    p.set_defaults(func=cmd_import_poincare)

    p = sub.add_parser("transform-bipartite", help="write the doubled bipartite graph")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_transform_bipartite)

    p = sub.add_parser("render", help="SVG drawing of a 2-d embedding")
    p.add_argument("embedding")
    p.add_argument("output", help="SVG path or - for stdout")
    p.add_argument("--edges", help="edge list to draw as arrows")
    p.add_argument("--no-edges", action="store_true")
    p.add_argument("--highlight", nargs="*", help="node labels to highlight")
    p.add_argument("--stroke-width", type=float, default=1.0)
    p.add_argument("--canvas-px", type=int, default=800)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("closure", help="transitive closure of a DAG edge list")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("wcc", help="largest weakly connected component")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_wcc)

    p = sub.add_parser("split", help="random train/held-out edge split")
    p.add_argument("input")
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out", required=True)
    p.add_argument("--held-out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("default-config", help="print a complete config file with default values")
    p.add_argument("output", nargs="?", default="-")
    p.set_defaults(func=cmd_default_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
