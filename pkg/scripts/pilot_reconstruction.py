"""Reconstruction of the transitive closure of a random 100-node DAG in R^10."""

import argparse
import time

from dancar.core import Hyperparams
from dancar.evaluation import reconstruction_report
from dancar.graph import random_dag, transitive_closure
from dancar.trainer import train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=100)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--graph-seed", type=int, default=0)
    ap.add_argument("--iterations", type=int, default=20000)
    ap.add_argument("--lambda-neg", type=float, nargs="+", default=[8.0, 100.0])
    ap.add_argument("--lambda-anc", type=float, default=1.0)
    ap.add_argument("--b2", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--check-every", type=int, default=2000)
    args = ap.parse_args()

    g = transitive_closure(random_dag(args.nodes, args.graph_seed))
    print(f"closure: {g.n_nodes} nodes, {g.n_edges} edges")
    for lam in args.lambda_neg:
        hp = Hyperparams(lambda_neg=lam, lambda_anc=args.lambda_anc, b2=args.b2, iterations=args.iterations, seed=args.seed)
        t0 = time.perf_counter()

        def report(it, loss, emb):
            if (it + 1) % args.check_every == 0:
                ev = reconstruction_report(g, emb)
                print(f"lambda_neg={lam} iter={it + 1} f1={ev.f1:.4f} p={ev.precision:.4f} r={ev.recall:.4f} "
                      f"loss={loss.total:.4g} {time.perf_counter() - t0:.1f}s", flush=True)

        train(g, hp, args.dim, on_step=report)

if __name__ == "__main__":
    main()
