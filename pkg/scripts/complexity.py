"""Per-sample training time on synthetic graphs of growing size."""
import argparse

import numpy as np

from mnembed.graph import build_graph
from mnembed.trainer import TrainConfig, train


def synthetic(n_edges, n_nodes, n_rel=10, isolated=0, seed=0):
    rng = np.random.default_rng(seed)
    tr = np.stack([rng.integers(0, n_nodes, n_edges), rng.integers(0, n_rel, n_edges),
                   rng.integers(0, n_nodes, n_edges)], axis=1)
    return build_graph(tr, n_nodes + isolated, n_rel)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--edges", type=int, nargs="+", default=[10**4, 10**5, 10**6])
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--negatives", type=int, default=5)
    ap.add_argument("--samples", type=int, default=500_000)
    ap.add_argument("--rounds", type=int, default=5)
    ap.add_argument("--model", default="mne")
    args = ap.parse_args()
    margin = 1.0 if args.model == "transe" else None
    cfg = TrainConfig(dim=args.dim, negatives=args.negatives, samples=args.samples, model=args.model, margin=margin)
    train(synthetic(1000, 100), cfg.replace(samples=1000))
    rows = []
    for E in args.edges:
        rows.append((E, E // 10, 0, synthetic(E, E // 10)))
        rows.append((E, E // 10, E // 10, synthetic(E, E // 10, isolated=E // 10)))
    best = [np.inf] * len(rows)
    for _ in range(args.rounds):
        for n, (*_, g) in enumerate(rows):
            best[n] = min(best[n], train(g, cfg).wall_time / cfg.samples)
    print("edges\tnodes\tisolated\tus_per_sample\tseconds_per_epoch")
    for (E, V, iso, _), t in zip(rows, best):
        print(f"{E}\t{V + iso}\t{iso}\t{t * 1e6:.3f}\t{t * 200 * E:.1f}")


if __name__ == "__main__":
    main()
