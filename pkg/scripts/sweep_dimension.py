"""Accuracy versus embedding dimension (triplet classification by default)."""
import argparse

from _common import benchmark, heavy_tailed_graph, setup_logging, write
from mnembed.evaluation import model_config, results_csv, results_tsv, sweep_dimension
from mnembed.trainer import TrainConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dataset", default="wn18")
    ap.add_argument("--synthetic", action="store_true")
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 5, 10, 20, 50, 100])
    ap.add_argument("--task", choices=("tc", "lp"), default="tc")
    ap.add_argument("--model", default="mne+")
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/sweep_dim")
    args = ap.parse_args()
    setup_logging()
    graph = heavy_tailed_graph() if args.synthetic else benchmark(args.dataset)
    base = model_config(args.model, TrainConfig(samples=args.samples, seed=args.seed))
    results = sweep_dimension(graph, args.dims, args.task, base, seed=args.seed)
    for r in results:
        r.model = args.model
    write(f"{args.out}/results.csv", results_csv(results))
    write(f"{args.out}/curve_dim.tsv", results_tsv(results, "dim"))


if __name__ == "__main__":
    main()
