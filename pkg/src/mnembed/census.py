"""Triangle and parallelogram motif census, and tri-node ratio subgraphs.

Motifs are counted over the set of distinct facts (duplicate triples do not
add instances). Triangles:

* feed-forward: (i, r, j), (j, r, k), (i, r, k)
* cyclic:       (i, r, j), (j, r, k), (k, r, i), counted once per rotation orbit

with one shared relation r when ``same_relation_only`` (the default),
otherwise any labels, counted once per labelled-edge combination.

Parallelogram: distinct nodes (v1, v2, v3, v7) with (v1, r1, v3),
(v2, r1, v7), (v1, r5, v2), (v3, r5, v7). The labelled edge set is counted
once (the ordered quadruple and its v2<->v3 mirror are the same instance).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import RelGraph, alias_tables, induced_subgraph
from .sampling import alias_draw, next_below, seed_state


class RatioError(ValueError):
    pass


@dataclass
class StructureCensus:
    n_nodes: int
    feedforward: int = 0
    cyclic: int = 0
    tri_nodes: np.ndarray | None = None
    parallelograms: float | None = None
    parallelograms_estimated: bool = False
    same_relation_only: bool = True

    @property
    def tri_node_count(self) -> int:
        return 0 if self.tri_nodes is None else int(self.tri_nodes.size)

    @property
    def tri_node_ratio(self) -> float:
        return self.tri_node_count / self.n_nodes if self.n_nodes else 0.0

    def rows(self) -> list[tuple]:
        """(structure, mode, count, exactness, tri-node-count, tri-node-ratio) rows."""
        tn, ratio = self.tri_node_count, self.tri_node_ratio
        label = "same-relation" if self.same_relation_only else "any-relation"
        rows = [
            ("triangle", f"feedforward/{label}", self.feedforward, "exact", tn, ratio),
            ("triangle", f"cyclic/{label}", self.cyclic, "exact", tn, ratio),
        ]
        if self.parallelograms is not None:
            rows.append(("parallelogram", "two-relation", self.parallelograms,
                         "estimated" if self.parallelograms_estimated else "exact", tn, ratio))
        return rows

    def to_tsv(self) -> str:
        out = ["structure\tmode\tcount\texactness\ttri-node-count\ttri-node-ratio"]
        for s, m, c, e, tn, ratio in self.rows():
            count = f"{c:.1f}" if e == "estimated" else str(int(c))
            out.append(f"{s}\t{m}\t{count}\t{e}\t{tn}\t{ratio:.6f}")
        return "\n".join(out) + "\n"


def _layered_edges(graph: RelGraph, same_relation_only: bool):
    """Distinct non-loop (layer, head, tail, multiplicity) rows.

    With same_relation_only each relation is its own layer; otherwise all
    relations collapse into layer 0 and multiplicity counts the labels.
    """
    u = graph.unique_triples()
    u = u[u[:, 0] != u[:, 2]]
    if same_relation_only:
        return u[:, 1].copy(), u[:, 0].copy(), u[:, 2].copy(), np.ones(len(u), np.int64)
    pairs, mult = np.unique(u[:, [0, 2]], axis=0, return_counts=True)
    if pairs.size == 0:
        pairs = np.zeros((0, 2), np.int64)
    return (np.zeros(len(pairs), np.int64), pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64),
            mult.astype(np.int64))


def _csr(keys, values, weights):
    order = np.lexsort((values, keys))
    keys, values, weights = keys[order], values[order], weights[order]
    uniq, start = np.unique(keys, return_index=True)
    ptr = np.append(start, keys.size).astype(np.int64)
    return uniq.astype(np.int64), ptr, values.astype(np.int64), weights.astype(np.int64)


@njit(cache=True)
def _row(keys, ptr, key):
    pos = np.searchsorted(keys, key)
    if pos < keys.shape[0] and keys[pos] == key:
        return ptr[pos], ptr[pos + 1]
    return 0, 0


@njit(cache=True)
def _triangle_kernel(layer, heads, tails, mult, n_nodes, okeys, optr, oval, ow, ikeys, iptr, ival, iw, member):
    ff = 0
    cyc = 0
    for e in range(heads.shape[0]):
        L = layer[e]
        a = heads[e]
        b = tails[e]
        w = mult[e]
        # e as the i->k shortcut: common j in out(i) & in(k)
        p0, p1 = _row(okeys, optr, L * n_nodes + a)
        q0, q1 = _row(ikeys, iptr, L * n_nodes + b)
        while p0 < p1 and q0 < q1:
            if oval[p0] < ival[q0]:
                p0 += 1
            elif oval[p0] > ival[q0]:
                q0 += 1
            else:
                ff += w * ow[p0] * iw[q0]
                member[a] = True
                member[b] = True
                member[oval[p0]] = True
                p0 += 1
                q0 += 1
        # e as i->j of a cycle: common k in out(j) & in(i)
        p0, p1 = _row(okeys, optr, L * n_nodes + b)
        q0, q1 = _row(ikeys, iptr, L * n_nodes + a)
        while p0 < p1 and q0 < q1:
            if oval[p0] < ival[q0]:
                p0 += 1
            elif oval[p0] > ival[q0]:
                q0 += 1
            else:
                cyc += w * ow[p0] * iw[q0]
                member[a] = True
                member[b] = True
                member[oval[p0]] = True
                p0 += 1
                q0 += 1
    return ff, cyc


def count_triangles(graph: RelGraph, same_relation_only: bool = True) -> StructureCensus:
    layer, heads, tails, mult = _layered_edges(graph, same_relation_only)
    n = np.int64(graph.n_nodes)
    okeys, optr, oval, ow = _csr(layer * n + heads, tails, mult)
    ikeys, iptr, ival, iw = _csr(layer * n + tails, heads, mult)
    member = np.zeros(graph.n_nodes, dtype=np.bool_)
    ff, cyc3 = _triangle_kernel(layer, heads, tails, mult, n, okeys, optr, oval, ow, ikeys, iptr, ival, iw, member)
    assert cyc3 % 3 == 0
    return StructureCensus(graph.n_nodes, int(ff), int(cyc3 // 3), np.flatnonzero(member),
                           same_relation_only=same_relation_only)


@njit(cache=True)
def _pair_count(U, hr_keys, hr_ptr, n_rel, v1, r5, v2, r1, v3):
    """#v7 outside {v1, v2, v3} with (v2, r1, v7) and (v3, r5, v7)."""
    if v2 == v3 or v2 == v1 or v3 == v1:
        return 0
    p0, p1 = _row(hr_keys, hr_ptr, v2 * n_rel + r1)
    q0, q1 = _row(hr_keys, hr_ptr, v3 * n_rel + r5)
    c = 0
    while p0 < p1 and q0 < q1:
        a = U[p0, 2]
        b = U[q0, 2]
        if a < b:
            p0 += 1
        elif a > b:
            q0 += 1
        else:
            if a != v1 and a != v2 and a != v3:
                c += 1
            p0 += 1
            q0 += 1
    return c


@njit(cache=True)
def _parallelogram_exact(U, node_ptr, hr_keys, hr_ptr, n_rel):
    total = 0
    for v1 in range(node_ptr.shape[0] - 1):
        a, b = node_ptr[v1], node_ptr[v1 + 1]
        for x in range(a, b):
            for y in range(a, b):
                if x != y:
                    total += _pair_count(U, hr_keys, hr_ptr, n_rel, v1, U[x, 1], U[x, 2], U[y, 1], U[y, 2])
    return total


@njit(cache=True)
def _parallelogram_sampled(U, node_ptr, hr_keys, hr_ptr, n_rel, prob, alias, budget, rng):
    acc = 0
    n_nodes = node_ptr.shape[0] - 1
    for _ in range(budget):
        v1 = alias_draw(prob, alias, 0, n_nodes, rng)
        a = node_ptr[v1]
        deg = node_ptr[v1 + 1] - a
        x = next_below(rng, deg)
        y = next_below(rng, deg - 1)
        if y >= x:
            y += 1
        acc += _pair_count(U, hr_keys, hr_ptr, n_rel, v1, U[a + x, 1], U[a + x, 2], U[a + y, 1], U[a + y, 2])
    return acc


def count_parallelograms(graph: RelGraph, exact_limit: int = 200_000, sample_budget: int = 200_000,
                         seed: int = 0) -> tuple[float, bool]:
    """(count, estimated). Exact when |E| <= exact_limit, else sampled.

    The sampled estimate draws ordered pairs of distinct out-edges sharing a
    source uniformly and scales their mean count by the number of such pairs.
    """
    U = np.ascontiguousarray(graph.unique_triples())
    n_rel = np.int64(graph.n_relations)
    node_ptr = np.zeros(graph.n_nodes + 1, np.int64)
    np.cumsum(np.bincount(U[:, 0], minlength=graph.n_nodes), out=node_ptr[1:])
    hr = U[:, 0] * n_rel + U[:, 1]
    hr_keys, start = np.unique(hr, return_index=True)
    hr_ptr = np.append(start, hr.size).astype(np.int64)
    hr_keys = hr_keys.astype(np.int64)
    if graph.n_edges <= exact_limit:
        return float(_parallelogram_exact(U, node_ptr, hr_keys, hr_ptr, n_rel) // 2), False
    deg = np.diff(node_ptr).astype(np.float64)
    pair_w = deg * (deg - 1)
    n_pairs = float(pair_w.sum())
    if n_pairs == 0 or sample_budget <= 0:
        return 0.0, True
    prob, alias = alias_tables(np.array([0, graph.n_nodes]), pair_w)
    hits = _parallelogram_sampled(U, node_ptr, hr_keys, hr_ptr, n_rel, prob, alias, int(sample_budget),
                                  seed_state(seed))
    return n_pairs * hits / sample_budget / 2.0, True


def census(graph: RelGraph, same_relation_only: bool = True, exact_limit: int = 200_000,
           sample_budget: int = 200_000, seed: int = 0) -> StructureCensus:
    result = count_triangles(graph, same_relation_only)
    result.parallelograms, result.parallelograms_estimated = count_parallelograms(
        graph, exact_limit, sample_budget, seed)
    return result


def filter_by_trinode_ratio(graph: RelGraph, target_ratio: float, seed: int = 0,
                            same_relation_only: bool = True, tolerance: float = 0.005) -> RelGraph:
    """Induced subgraph on all tri-nodes plus uniformly drawn free nodes.

    The number of free nodes is chosen so tri-nodes / |V'| is as close as
    possible to `target_ratio`; achievable ratios lie in
    [|tri-nodes| / |V|, 1]. Ratio 1 returns the triangle core itself.
    """
    tri = count_triangles(graph, same_relation_only).tri_nodes
    n_tri = tri.size
    lo = n_tri / graph.n_nodes if graph.n_nodes else 0.0
    if n_tri == 0:
        raise RatioError("graph has no tri-nodes")
    if not (lo - tolerance <= target_ratio <= 1.0):
        raise RatioError(f"target ratio {target_ratio} outside achievable interval [{lo:.6f}, 1]")
    free = np.setdiff1d(np.arange(graph.n_nodes), tri)
    ideal = n_tri / max(target_ratio, 1e-12) - n_tri
    candidates = {int(np.clip(np.floor(ideal), 0, free.size)), int(np.clip(np.ceil(ideal), 0, free.size))}
    m = min(candidates, key=lambda c: abs(n_tri / (n_tri + c) - target_ratio))
    achieved = n_tri / (n_tri + m)
    if abs(achieved - target_ratio) > tolerance:
        raise RatioError(f"closest achievable ratio {achieved:.4f} misses target {target_ratio:.4f} "
                         f"by more than {tolerance}")
    picked = np.random.default_rng(seed).choice(free, size=m, replace=False) if m else np.zeros(0, np.int64)
    return induced_subgraph(graph, np.concatenate([tri, picked]))
