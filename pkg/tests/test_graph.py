import numpy as np
import pytest
from hypothesis import given, strategies as st

from mnembed.graph import (GraphError, Vocabulary, build_graph, dump_graph, induced_subgraph, load_graph,
                           load_triples)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_bytes(text.encode())
    return p


def test_load_assigns_first_seen_ids(tmp_path):
    p = write(tmp_path, "g.tsv", "a\tr\tb\nb\ts\tc\na\tr\tb\n")
    vocab, triples = load_triples(p)
    assert vocab.entities == ["a", "b", "c"]
    assert vocab.relations == ["r", "s"]
    assert triples == [(0, 0, 1), (1, 1, 2), (0, 0, 1)]


def test_load_multiple_files_and_crlf(tmp_path):
    a = write(tmp_path, "a.tsv", "x\tr\ty\r\n\r\n")
    b = write(tmp_path, "b.tsv", "y\tr\tz\n")
    vocab, graph = load_graph([a, b])
    assert graph.n_edges == 2 and vocab.n_entities == 3


def test_malformed_line_reports_position(tmp_path):
    p = write(tmp_path, "bad.tsv", "a\tr\tb\na\tb\n")
    with pytest.raises(GraphError, match=r"bad.tsv:2"):
        load_triples(p)


def test_fixed_vocab_rejects_unknown_label(tmp_path):
    p = write(tmp_path, "g.tsv", "a\tr\tzzz\n")
    with pytest.raises(KeyError):
        load_triples(p, Vocabulary(["a"], ["r"]))


def test_weights_column(tmp_path):
    p = write(tmp_path, "w.tsv", "a\tr\tb\t2.5\nb\tr\ta\n")
    _, _, w = load_triples(p, with_weights=True)
    assert list(w) == [2.5, 1.0]
    with pytest.raises(GraphError):
        load_triples(write(tmp_path, "x.tsv", "a\tr\tb\tnope\n"), with_weights=True)


def test_build_validates():
    with pytest.raises(GraphError):
        build_graph([(0, 0, 5)], 3, 1)
    with pytest.raises(GraphError):
        build_graph([(0, 0, 1)], 3, 1, weights=[0.0])


def test_adjacency_and_degrees(rng):
    from conftest import random_graph
    g = random_graph(rng, weighted=True)
    for i in range(g.n_nodes):
        outs = sorted((r, t) for r, t, _ in g.out_adj(i))
        expect = sorted((int(r), int(t)) for h, r, t in g.triples() if h == i)
        assert outs == expect
        assert g.out_degree(i) == sum(1 for h, _, _ in g.triples() if h == i)
        assert g.in_degree(i) == sum(1 for _, _, t in g.triples() if t == i)


def test_alias_segments_match_weights(rng):
    from conftest import random_graph
    from mnembed.sampling import AliasTable
    g = random_graph(rng, weighted=True)
    for i in range(g.n_nodes):
        a, b = g.out_ptr[i], g.out_ptr[i + 1]
        if b == a:
            continue
        prob, alias = g.out_prob[a:b], g.out_alias[a:b]
        n = b - a
        implied = prob / n
        implied = implied.copy()
        np.add.at(implied, alias, (1 - prob) / n)
        w = g.weights[g.out_eid[a:b]]
        np.testing.assert_allclose(implied, w / w.sum(), atol=1e-12)


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 2), st.integers(0, 6)), min_size=1, max_size=40))
def test_fact_membership_matches_set(triples):
    g = build_graph(triples, 7, 3)
    facts = set(triples)
    for h in range(7):
        for r in range(3):
            for t in range(7):
                assert g.has_fact(h, r, t) == ((h, r, t) in facts)
    assert len(g.unique_triples()) == len(facts)
    arr = np.array(triples)
    assert g.contains(arr).all()


def test_dump_round_trip(tmp_path, rng):
    from conftest import random_graph
    g = random_graph(rng, weighted=True)
    p = tmp_path / "out.tsv"
    dump_graph(g, p, write_weights=True)
    vocab = Vocabulary([str(i) for i in range(g.n_nodes)], [str(r) for r in range(g.n_relations)])
    _, g2 = load_graph(p, vocab)
    assert g2.triples() == g.triples()
    assert np.array_equal(g2.weights, g.weights)


def test_induced_subgraph_keeps_internal_edges():
    g = build_graph([(0, 0, 1), (1, 0, 2), (2, 0, 3), (3, 0, 0)], 4, 1)
    sub = induced_subgraph(g, [3, 1, 2])
    assert sub.n_nodes == 3
    assert list(sub.origin) == [1, 2, 3]
    assert sorted(sub.triples()) == [(0, 0, 1), (1, 0, 2)]


def test_arrays_are_read_only(toy_graph):
    with pytest.raises(ValueError):
        toy_graph.heads[0] = 3
