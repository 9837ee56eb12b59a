"""Reconstruction and link-prediction runs on one edge list.

Optionally restricts to the largest weak component and takes the transitive
closure first, then trains once on the full graph (reconstruction) and once
on a random edge split (link prediction, scored against all edges).

    python scripts/run_protocol.py graph.txt --closure --wcc --dim 10 --lambda-neg 8 100
"""

import argparse
import time

from dancar.core import Hyperparams
from dancar.evaluation import dancar_ranker, link_prediction_report, map_score, reconstruction_report
from dancar.graph import largest_weakly_connected_component, read_edge_list, split_edges, transitive_closure
from dancar.trainer import train


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("edges")
    ap.add_argument("--wcc", action="store_true", help="keep the largest weakly connected component")
    ap.add_argument("--closure", action="store_true", help="take the transitive closure (DAG input)")
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--lambda-neg", type=float, nargs="+", default=[8.0])
    ap.add_argument("--lambda-anc", type=float, default=1.0)
    ap.add_argument("--b1", type=int, default=10000)
    ap.add_argument("--b2", type=int, default=10000)
    ap.add_argument("--iterations", type=int, default=3000)
    ap.add_argument("--train-fraction", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--map", action="store_true")
    ap.add_argument("--prune", action="store_true")
    args = ap.parse_args()

    g = read_edge_list(args.edges)
    if args.wcc:
        g = largest_weakly_connected_component(g)
    if args.closure:
        g = transitive_closure(g)
    print(f"graph: {g.n_nodes} nodes, {g.n_edges} edges")
    train_g, held = split_edges(g, args.train_fraction, args.seed)

    for lam in args.lambda_neg:
        hp = Hyperparams(
            lambda_neg=lam, lambda_anc=args.lambda_anc, b1=args.b1, b2=args.b2, iterations=args.iterations, seed=args.seed
        )
        t = time.perf_counter()
        emb = train(g, hp, args.dim).embedding
        rec = reconstruction_report(g, emb, prune=args.prune)
        if args.map:
            rec.map = map_score(g, dancar_ranker(emb))
        print(f"reconstruction lambda_neg={lam}: {rec.summary_line()} ({time.perf_counter() - t:.1f}s)")

        t = time.perf_counter()
        emb = train(train_g, hp, args.dim).embedding
        lp = link_prediction_report(g, train_g, emb, prune=args.prune)
        print(f"link prediction lambda_neg={lam} ({len(held)} held out): {lp.summary_line()} ({time.perf_counter() - t:.1f}s)")


if __name__ == "__main__":
    main()
