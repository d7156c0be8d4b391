"""Brute-force motif counts used as independent oracles."""
import itertools

import numpy as np


def adjacency(graph, same_relation_only=True):
    """Per-layer 0/1 (or multiplicity) tensors over distinct non-loop facts."""
    u = graph.unique_triples()
    V = graph.n_nodes
    layers = graph.n_relations if same_relation_only else 1
    A = np.zeros((layers, V, V), dtype=np.int64)
    for h, r, t in u:
        if h != t:
            A[r if same_relation_only else 0, h, t] += 1
    return A


def triangles(graph, same_relation_only=True):
    A = adjacency(graph, same_relation_only)
    ff = sum(int(np.einsum("ij,jk,ik->", a, a, a)) for a in A)
    cyc = sum(int(np.einsum("ij,jk,ki->", a, a, a)) for a in A) // 3
    nodes = set()
    V = graph.n_nodes
    for a in A:
        for i, j, k in itertools.permutations(range(V), 3):
            if a[i, j] and a[j, k] and (a[i, k] or a[k, i]):
                nodes.update((i, j, k))
    return ff, cyc, sorted(nodes)


def parallelograms(graph):
    """Count labelled parallelograms: ordered quadruple sum over relation pairs, halved."""
    B = np.zeros((graph.n_relations, graph.n_nodes, graph.n_nodes), dtype=np.int64)
    for h, r, t in graph.unique_triples():
        B[r, h, t] = 1
    # P[a, b, v1, v2, v3, v7] = B[a,v1,v3] B[a,v2,v7] B[b,v1,v2] B[b,v3,v7]
    total = np.einsum("aik,ajl,bij,bkl->ijkl", B, B, B, B)
    V = graph.n_nodes
    idx = np.arange(V)
    i, j, k, l = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    distinct = (i != j) & (i != k) & (i != l) & (j != k) & (j != l) & (k != l)
    s = int(total[distinct].sum())
    assert s % 2 == 0
    return s // 2
