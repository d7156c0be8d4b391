"""Triplet classification and link prediction on WN18 / FB15K for every model.

    MNE_DATA_DIR=/path/to/data python3 scripts/reproduce_benchmarks.py --datasets wn18 fb15k

Use ``--synthetic`` to run the same grid on a heavy-tailed synthetic graph.
"""
import argparse

from _common import benchmark, heavy_tailed_graph, setup_logging, write
from mnembed.evaluation import model_config, results_csv, run_task
from mnembed.trainer import TrainConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--datasets", nargs="+", default=["wn18", "fb15k"])
    ap.add_argument("--synthetic", action="store_true")
    ap.add_argument("--models", nargs="+", default=["mne+", "mne*", "rline+", "transe"])
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--samples", type=int, default=None, help="default 200 * |E|")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/benchmarks.csv")
    args = ap.parse_args()
    setup_logging()
    base = TrainConfig(dim=args.dim, samples=args.samples, workers=args.threads, seed=args.seed)
    graphs = {"synthetic": heavy_tailed_graph()} if args.synthetic else {d: benchmark(d) for d in args.datasets}
    results = []
    for name, graph in graphs.items():
        for model in args.models:
            for task in ("tc", "lp"):
                res = run_task(graph, model_config(model, base), task, seed=args.seed)
                res.model = f"{name}/{model}"
                print(f"{name}\t{model}\t{task}\t{res.accuracy:.4f}", flush=True)
                results.append(res)
    write(args.out, results_csv(results))


if __name__ == "__main__":
    main()
