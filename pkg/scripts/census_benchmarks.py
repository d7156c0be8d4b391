"""Dataset statistics and motif census for the benchmarks found on disk."""
import argparse

from _common import benchmark, setup_logging
from mnembed.census import census
from mnembed.datasets import BENCHMARKS, DatasetMissing


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--datasets", nargs="+", default=list(BENCHMARKS))
    ap.add_argument("--any-relation", action="store_true")
    args = ap.parse_args()
    setup_logging()
    for name in args.datasets:
        try:
            g = benchmark(name)
        except DatasetMissing as exc:
            print(f"# {exc}")
            continue
        expected = BENCHMARKS[name]
        print(f"# {name}: |V|={g.n_nodes} |R|={g.n_relations} |E|={g.n_edges} (expected {expected})")
        print(census(g, same_relation_only=not args.any_relation).to_tsv(), end="")


if __name__ == "__main__":
    main()
