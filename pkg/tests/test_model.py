import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_graph
from mnembed.model import (BridgeMode, EmbeddingTable, bridge, case_pairs, edge_score, exact_case_probability,
                           exact_p_in, exact_p_out, triple_score)
from mnembed.sampling import StructureSample

vec = arrays(np.float64, 5, elements=st.floats(-3, 3))


def test_bridge_mode_parsing():
    assert BridgeMode.parse("+") is BridgeMode.ADD
    assert BridgeMode.parse("mul") is BridgeMode.MUL
    with pytest.raises(ValueError):
        BridgeMode.parse("concat")


@given(vec, vec)
def test_mul_bridge_equals_outer_product(u, r):
    np.testing.assert_allclose(bridge(u, r, "mul"), np.outer(r, r) @ u, atol=1e-12)


@given(vec, vec)
def test_add_bridge(u, r):
    np.testing.assert_array_equal(bridge(u, r, "add"), u + r)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        bridge(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        edge_score(np.ones(3), np.ones(2))


def test_known_scores():
    t = EmbeddingTable(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([[1.0, 1.0], [3.0, 0.0]]),
                       np.array([[0.5, 0.5]]))
    assert triple_score(t, "add", 0, 0, 1) == pytest.approx(3 * 1.5)
    # <r,h> r = 0.5 * (0.5, 0.5); dot with (3, 0)
    assert triple_score(t, "mul", 0, 0, 1) == pytest.approx(0.75)


@given(vec, vec, vec)
def test_mul_role_swap_symmetry(a, b, r):
    lhs = np.dot(b, bridge(a, r, "mul"))
    rhs = np.dot(a, bridge(b, r, "mul"))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_add_role_swap_breaks():
    rng = np.random.default_rng(0)
    a, b, r = rng.normal(size=(3, 8))
    assert abs(np.dot(b, bridge(a, r, "add")) - np.dot(a, bridge(b, r, "add"))) > 1e-3


@pytest.mark.parametrize("mode", ["add", "mul"])
def test_exact_probabilities_normalise(mode):
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = random_graph(rng)
        table = EmbeddingTable.random(g.n_nodes, g.n_relations, 6, seed=int(rng.integers(1000)))
        table.source *= 50
        table.target *= 50
        table.relation *= 50
        for i in range(g.n_nodes):
            outs = [(t, r) for r, t, _ in g.out_adj(i)]
            if outs:
                assert abs(sum(exact_p_out(g, table, mode, i, t, r) for t, r in outs) - 1) < 1e-9
            ins = [(h, r) for r, h, _ in g.in_adj(i)]
            if ins:
                assert abs(sum(exact_p_in(g, table, mode, i, h, r) for h, r in ins) - 1) < 1e-9
            for case in (1, 2, 3):
                pairs = case_pairs(g, i, case)
                if not pairs:
                    continue
                total = 0.0
                # one term per ordered pair of edge positions (duplicates included)
                for a, b in pairs:
                    j = a[2] if case == 1 else a[0]
                    k = b[0] if case == 3 else b[2]
                    s = StructureSample(case, i, j, a[1], k, b[1], 1.0)
                    total += exact_case_probability(g, table, mode, s)
                assert abs(total - 1) < 1e-9


def test_non_edge_rejected(toy_graph):
    t = EmbeddingTable.random(4, 2, 3)
    with pytest.raises(ValueError):
        exact_p_out(toy_graph, t, "add", 0, 3, 0)


def test_random_table_range():
    t = EmbeddingTable.random(10, 3, 8, seed=2)
    assert np.abs(t.source).max() < 0.5 / 8
    assert t.equals(EmbeddingTable.random(10, 3, 8, seed=2))
