import numpy as np
import pytest
from hypothesis import settings

from mnembed.graph import build_graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_graph(rng, n_nodes=None, n_rel=None, n_edges=None, weighted=False, max_nodes=20):
    V = int(n_nodes or rng.integers(3, max_nodes + 1))
    R = int(n_rel or rng.integers(1, 4))
    E = int(n_edges or rng.integers(V, 4 * V))
    triples = np.stack([rng.integers(0, V, E), rng.integers(0, R, E), rng.integers(0, V, E)], axis=1)
    weights = rng.uniform(0.5, 3.0, E) if weighted else None
    return build_graph(triples, V, R, weights)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy_graph():
    """Two-relation parallelogram a->c, b->d (r1) and a->b, c->d (r5)."""
    # a=0 b=1 c=2 d=3, r1=0 r5=1
    return build_graph([(0, 0, 2), (1, 0, 3), (0, 1, 1), (2, 1, 3)], 4, 2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
