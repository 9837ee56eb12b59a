"""Train directed cycles C_3..C_10 in the plane and report reconstruction F1."""

import argparse
import time

from dancar.core import Hyperparams
from dancar.evaluation import reconstruction_report
from dancar.graph import DirectedGraph
from dancar.trainer import train


def cycle(n):
    return DirectedGraph(n, [(i, (i + 1) % n) for i in range(n)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iterations", type=int, default=5000)
    ap.add_argument("--lambda-neg", type=float, default=0.1)
    ap.add_argument("--lambda-anc", type=float, default=10.0)
    ap.add_argument("--b2", type=int, default=1024)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--max-n", type=int, default=10)
    args = ap.parse_args()
    for n in range(3, args.max_n + 1):
        for seed in args.seeds:
            hp = Hyperparams(
                lambda_neg=args.lambda_neg,
                lambda_anc=args.lambda_anc,
                b2=args.b2,
                adam_alpha=args.alpha,
                iterations=args.iterations,
                seed=seed,
            )
            t = time.perf_counter()
            rep = train(cycle(n), hp, 2)
            zero = next((i for i, h in enumerate(rep.history) if h.total == 0.0), None)
            f1 = reconstruction_report(cycle(n), rep.embedding).f1
            print(f"n={n} seed={seed} f1={f1:.4f} first_zero_loss={zero} {time.perf_counter() - t:.2f}s")


if __name__ == "__main__":
    main()
