"""Accuracy versus tri-node ratio on filtered subgraphs, several models."""
import argparse

import numpy as np

from _common import benchmark, heavy_tailed_graph, setup_logging, write
from mnembed.census import count_triangles
from mnembed.evaluation import results_csv, results_tsv, sweep_trinode_ratio
from mnembed.trainer import TrainConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dataset", default="wn18")
    ap.add_argument("--synthetic", action="store_true")
    ap.add_argument("--ratios", type=float, nargs="*", help="default: 5 points from the graph's ratio to 1")
    ap.add_argument("--models", nargs="+", default=["mne+", "mne*", "transe"])
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/sweep_trinode")
    args = ap.parse_args()
    setup_logging()
    graph = heavy_tailed_graph() if args.synthetic else benchmark(args.dataset)
    ratios = args.ratios
    if not ratios:
        lo = count_triangles(graph).tri_node_ratio
        ratios = [round(float(x), 3) for x in np.linspace(lo + 0.005, 1.0, 5)]
    base = TrainConfig(dim=args.dim, samples=args.samples, seed=args.seed)
    results = sweep_trinode_ratio(graph, ratios, args.models, base, seed=args.seed)
    write(f"{args.out}/results.csv", results_csv(results))
    write(f"{args.out}/curve_ratio.tsv", results_tsv(results, "ratio"))


if __name__ == "__main__":
    main()
