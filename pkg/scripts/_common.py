import logging
import sys
from pathlib import Path

import numpy as np

from mnembed.datasets import benchmark_files
from mnembed.graph import build_graph, load_graph


def setup_logging(quiet=False):
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, stream=sys.stderr, format="%(message)s")


def benchmark(name):
    vocab, graph = load_graph(benchmark_files(name), with_weights=False)
    return graph


def heavy_tailed_graph(n_nodes=2000, n_rel=8, n_edges=20000, seed=0):
    """Zipf-like head and tail popularity; a stand-in when no benchmark is on disk."""
    rng = np.random.default_rng(seed)
    p = 1.0 / np.arange(1, n_nodes + 1)
    p /= p.sum()
    heads = rng.choice(n_nodes, n_edges, p=p)
    tails = rng.choice(n_nodes, n_edges, p=p[rng.permutation(n_nodes)])
    rels = rng.integers(0, n_rel, n_edges)
    return build_graph(np.stack([heads, rels, tails], 1), n_nodes, n_rel)


def write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}", file=sys.stderr)
