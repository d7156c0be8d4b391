import numpy as np
import pytest

from conftest import random_graph
from oracles import parallelograms, triangles
from mnembed.census import RatioError, census, count_parallelograms, count_triangles, filter_by_trinode_ratio
from mnembed.graph import build_graph


def test_toy_parallelogram(toy_graph):
    c = census(toy_graph)
    assert c.parallelograms == 1 and not c.parallelograms_estimated
    assert c.feedforward == 0 and c.cyclic == 0 and c.tri_node_count == 0


def test_single_triangles():
    ff = build_graph([(0, 0, 1), (1, 0, 2), (0, 0, 2)], 3, 1)
    cyc = build_graph([(0, 0, 1), (1, 0, 2), (2, 0, 0)], 3, 1)
    assert (count_triangles(ff).feedforward, count_triangles(ff).cyclic) == (1, 0)
    assert (count_triangles(cyc).feedforward, count_triangles(cyc).cyclic) == (0, 1)
    assert list(count_triangles(cyc).tri_nodes) == [0, 1, 2]


def test_mixed_relations_only_in_any_mode():
    g = build_graph([(0, 0, 1), (1, 1, 2), (0, 0, 2)], 3, 2)
    assert count_triangles(g).feedforward == 0
    assert count_triangles(g, same_relation_only=False).feedforward == 1


def test_duplicates_and_loops_do_not_add():
    g = build_graph([(0, 0, 1), (0, 0, 1), (1, 0, 2), (0, 0, 2), (1, 0, 1)], 3, 1)
    assert count_triangles(g).feedforward == 1


@pytest.mark.parametrize("same", [True, False])
def test_triangles_match_einsum_oracle(same):
    rng = np.random.default_rng(int(same))
    for _ in range(40):
        g = random_graph(rng, max_nodes=15)
        ff, cyc, nodes = triangles(g, same)
        c = count_triangles(g, same)
        assert (c.feedforward, c.cyclic) == (ff, cyc)
        assert list(c.tri_nodes) == nodes


def test_parallelograms_match_oracle():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = random_graph(rng, max_nodes=9)
        assert count_parallelograms(g)[0] == parallelograms(g)


def test_sampled_parallelogram_estimate_is_close():
    rng = np.random.default_rng(4)
    g = random_graph(rng, n_nodes=60, n_rel=2, n_edges=900)
    exact, est_flag = count_parallelograms(g)
    approx, flag = count_parallelograms(g, exact_limit=0, sample_budget=400_000, seed=1)
    assert not est_flag and flag
    assert approx == pytest.approx(exact, rel=0.05)


def test_tsv_layout(toy_graph):
    lines = census(toy_graph).to_tsv().splitlines()
    assert lines[0].split("\t") == ["structure", "mode", "count", "exactness", "tri-node-count", "tri-node-ratio"]
    assert lines[-1].split("\t")[:4] == ["parallelogram", "two-relation", "1", "exact"]


def _core_plus_free():
    # two triangles on 0..5 plus 14 free nodes hanging off node 0
    tri = [(0, 0, 1), (1, 0, 2), (0, 0, 2), (3, 0, 4), (4, 0, 5), (5, 0, 3)]
    free = [(0, 0, v) for v in range(6, 20)]
    return build_graph(tri + free, 20, 1)


@pytest.mark.parametrize("ratio", [0.3, 0.5, 0.75, 1.0])
def test_filter_hits_ratio(ratio):
    g = _core_plus_free()
    sub = filter_by_trinode_ratio(g, ratio, seed=2)
    c = count_triangles(sub)
    assert abs(c.tri_node_ratio - ratio) <= 0.005
    assert c.tri_node_count == 6


def test_filter_is_seeded():
    g = _core_plus_free()
    a = filter_by_trinode_ratio(g, 0.5, seed=1)
    b = filter_by_trinode_ratio(g, 0.5, seed=1)
    assert np.array_equal(a.origin, b.origin)


def test_filter_out_of_range():
    g = _core_plus_free()
    with pytest.raises(RatioError, match="achievable"):
        filter_by_trinode_ratio(g, 0.1)
    with pytest.raises(RatioError):
        filter_by_trinode_ratio(build_graph([(0, 0, 1)], 2, 1), 0.5)
