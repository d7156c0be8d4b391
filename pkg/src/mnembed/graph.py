"""Directed multi-relational graphs: triple loading, indexing and adjacency."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numba import njit


class GraphError(ValueError):
    """Raised for malformed input files or out-of-range graph data."""


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Vocabulary:
    """Bidirectional label <-> dense index maps for entities and relations.

    Indices are assigned in first-seen order.
    """

    def __init__(self, entities: Iterable[str] = (), relations: Iterable[str] = ()):
        self.entities: list[str] = []
        self.relations: list[str] = []
        self._entity_index: dict[str, int] = {}
        self._relation_index: dict[str, int] = {}
        for e in entities:
            self.add_entity(e)
        for r in relations:
            self.add_relation(r)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    def add_entity(self, label: str) -> int:
        idx = self._entity_index.get(label)
        if idx is None:
            idx = self._entity_index[label] = len(self.entities)
            self.entities.append(label)
        return idx

    def add_relation(self, label: str) -> int:
        idx = self._relation_index.get(label)
        if idx is None:
            idx = self._relation_index[label] = len(self.relations)
            self.relations.append(label)
        return idx

    def entity_id(self, label: str) -> int:
        try:
            return self._entity_index[label]
        except KeyError:
            raise KeyError(f"unknown entity label {label!r}") from None

    def relation_id(self, label: str) -> int:
        try:
            return self._relation_index[label]
        except KeyError:
            raise KeyError(f"unknown relation label {label!r}") from None

    def copy(self) -> "Vocabulary":
        return Vocabulary(self.entities, self.relations)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.entities == other.entities and self.relations == other.relations

    def __repr__(self) -> str:
        return f"Vocabulary({self.n_entities} entities, {self.n_relations} relations)"


def _split_line(line: str, path, lineno: int, allow_weight: bool):
    line = line.rstrip("\r\n")
    if not line.strip():
        return None
    fields = line.split("\t")
    if len(fields) == 3 or (allow_weight and len(fields) == 4):
        return fields
    raise GraphError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")


def load_triples(
    paths: str | Path | Sequence[str | Path],
    vocab: Vocabulary | None = None,
    *,
    with_weights: bool = False,
):
    """Read ``head<TAB>relation<TAB>tail`` lines from one or more files.

    When `vocab` is given it is treated as fixed and every label must resolve
    in it; otherwise a new vocabulary is grown in first-seen order. Duplicate
    lines are kept. Several paths are read as one concatenated stream.

    With `with_weights`, an optional fourth weight column is accepted and a
    third array of weights is returned (1.0 where the column is absent).
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    fixed = vocab is not None
    vocab = vocab if fixed else Vocabulary()
    triples: list[Triple] = []
    weights: list[float] = []
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, line in enumerate(fh, 1):
                fields = _split_line(line, path, lineno, with_weights)
                if fields is None:
                    continue
                h, r, t = fields[:3]
                if fixed:
                    triple = Triple(vocab.entity_id(h), vocab.relation_id(r), vocab.entity_id(t))
                else:
                    hi = vocab.add_entity(h)
                    ri = vocab.add_relation(r)
                    triple = Triple(hi, ri, vocab.add_entity(t))
                triples.append(triple)
                if with_weights:
                    try:
                        weights.append(float(fields[3]) if len(fields) == 4 else 1.0)
                    except ValueError:
                        raise GraphError(f"{path}:{lineno}: bad weight {fields[3]!r}") from None
    if with_weights:
        return vocab, triples, np.asarray(weights, dtype=np.float64)
    return vocab, triples


@njit(cache=True)
def _build_alias_segments(ptr, weights_in_order, prob, alias):
    # Vose alias table per CSR segment; alias holds segment-local offsets.
    n_seg = ptr.shape[0] - 1
    maxlen = 0
    for s in range(n_seg):
        maxlen = max(maxlen, ptr[s + 1] - ptr[s])
    small = np.empty(maxlen, np.int64)
    large = np.empty(maxlen, np.int64)
    scaled = np.empty(maxlen, np.float64)
    for s in range(n_seg):
        a = ptr[s]
        n = ptr[s + 1] - a
        if n == 0:
            continue
        total = 0.0
        for q in range(n):
            total += weights_in_order[a + q]
        ns = 0
        nl = 0
        for q in range(n):
            scaled[q] = weights_in_order[a + q] * n / total
            if scaled[q] < 1.0:
                small[ns] = q
                ns += 1
            else:
                large[nl] = q
                nl += 1
        while ns > 0 and nl > 0:
            ns -= 1
            lo = small[ns]
            nl -= 1
            hi = large[nl]
            prob[a + lo] = scaled[lo]
            alias[a + lo] = hi
            scaled[hi] = scaled[hi] + scaled[lo] - 1.0
            if scaled[hi] < 1.0:
                small[ns] = hi
                ns += 1
            else:
                large[nl] = hi
                nl += 1
        while nl > 0:
            nl -= 1
            prob[a + large[nl]] = 1.0
            alias[a + large[nl]] = large[nl]
        while ns > 0:
            ns -= 1
            prob[a + small[ns]] = 1.0
            alias[a + small[ns]] = small[ns]


def alias_tables(ptr: np.ndarray, weights_in_order: np.ndarray):
    """Build one alias table per CSR segment of `weights_in_order`."""
    prob = np.ones(weights_in_order.shape[0], dtype=np.float64)
    alias = np.zeros(weights_in_order.shape[0], dtype=np.int64)
    _build_alias_segments(np.asarray(ptr, np.int64), np.asarray(weights_in_order, np.float64), prob, alias)
    return prob, alias


def fact_key(h, r, t, n_nodes: int, n_relations: int):
    """Scalar (or vectorised) int64 key of a triple, monotone in (h, r, t)."""
    return (np.asarray(h, np.int64) * n_relations + r) * n_nodes + t


@dataclass(frozen=True, eq=False)
class RelGraph:
    """Immutable directed multi-relational graph in CSR form.

    Edge ids index the parallel `heads`/`relations`/`tails`/`weights`
    arrays. ``out_eid[out_ptr[i]:out_ptr[i+1]]`` are the edges leaving node
    i (sorted by relation, then tail); ``in_eid`` likewise for edges entering
    i. `fact_keys` is the sorted unique set of triple keys.
    """

    n_nodes: int
    n_relations: int
    heads: np.ndarray
    relations: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    out_ptr: np.ndarray
    out_eid: np.ndarray
    in_ptr: np.ndarray
    in_eid: np.ndarray
    d_out: np.ndarray
    d_in: np.ndarray
    fact_keys: np.ndarray
    out_prob: np.ndarray
    out_alias: np.ndarray
    in_prob: np.ndarray
    in_alias: np.ndarray
    # parent-graph node index of every node, for induced subgraphs
    origin: np.ndarray | None = field(default=None)

    @property
    def n_edges(self) -> int:
        return int(self.heads.shape[0])

    def triples(self) -> list[Triple]:
        return [Triple(int(h), int(r), int(t)) for h, r, t in zip(self.heads, self.relations, self.tails)]

    def out_degree(self, i: int) -> int:
        return int(self.out_ptr[i + 1] - self.out_ptr[i])

    def in_degree(self, i: int) -> int:
        return int(self.in_ptr[i + 1] - self.in_ptr[i])

    def out_adj(self, i: int) -> list[tuple[int, int, float]]:
        """(relation, target, weight) for every edge leaving `i`."""
        eids = self.out_eid[self.out_ptr[i]:self.out_ptr[i + 1]]
        return [(int(self.relations[e]), int(self.tails[e]), float(self.weights[e])) for e in eids]

    def in_adj(self, i: int) -> list[tuple[int, int, float]]:
        """(relation, source, weight) for every edge entering `i`."""
        eids = self.in_eid[self.in_ptr[i]:self.in_ptr[i + 1]]
        return [(int(self.relations[e]), int(self.heads[e]), float(self.weights[e])) for e in eids]

    def has_fact(self, h: int, r: int, t: int) -> bool:
        if not (0 <= h < self.n_nodes and 0 <= t < self.n_nodes and 0 <= r < self.n_relations):
            return False
        key = fact_key(h, r, t, self.n_nodes, self.n_relations)
        pos = np.searchsorted(self.fact_keys, key)
        return bool(pos < self.fact_keys.shape[0] and self.fact_keys[pos] == key)

    def contains(self, h, r=None, t=None) -> np.ndarray:
        """Vectorised fact-set membership for index arrays, or one (n, 3) array."""
        if r is None:
            arr = np.asarray(h, dtype=np.int64).reshape(-1, 3)
            h, r, t = arr[:, 0], arr[:, 1], arr[:, 2]
        key = fact_key(h, r, t, self.n_nodes, self.n_relations)
        pos = np.searchsorted(self.fact_keys, key)
        pos = np.minimum(pos, max(self.fact_keys.shape[0] - 1, 0))
        if self.fact_keys.shape[0] == 0:
            return np.zeros(np.shape(key), dtype=bool)
        return self.fact_keys[pos] == key

    def unique_triples(self) -> np.ndarray:
        """Distinct facts as an (n, 3) int64 array sorted by (h, r, t)."""
        k = self.fact_keys
        t = k % self.n_nodes
        hr = k // self.n_nodes
        return np.stack([hr // self.n_relations, hr % self.n_relations, t], axis=1)

    def kernel_view(self):
        """Tuple of arrays consumed by the compiled samplers and trainers."""
        return (
            self.heads, self.relations, self.tails, self.weights,
            self.out_ptr, self.out_eid, self.out_prob, self.out_alias,
            self.in_ptr, self.in_eid, self.in_prob, self.in_alias,
            self.fact_keys, np.int64(self.n_nodes), np.int64(self.n_relations),
        )


def build_graph(triples, n_nodes: int, n_relations: int, weights=None, origin=None) -> RelGraph:
    """Index `triples` (sequence of Triple or an (n, 3) array) into a RelGraph.

    Weights default to 1 and must be strictly positive. Duplicate triples are
    kept as parallel edges.
    """
    arr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    heads, rels, tails = arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy()
    m = arr.shape[0]
    if m:
        if heads.min() < 0 or tails.min() < 0 or max(heads.max(), tails.max()) >= n_nodes:
            raise GraphError(f"node index out of range [0, {n_nodes})")
        if rels.min() < 0 or rels.max() >= n_relations:
            raise GraphError(f"relation index out of range [0, {n_relations})")
    if weights is None:
        w = np.ones(m, dtype=np.float64)
    else:
        w = np.asarray(weights, dtype=np.float64).copy()
        if w.shape != (m,):
            raise GraphError(f"expected {m} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise GraphError("edge weights must be finite and strictly positive")

    out_order = np.lexsort((np.arange(m), tails, rels, heads))
    in_order = np.lexsort((np.arange(m), heads, rels, tails))
    out_ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    in_ptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(heads, minlength=n_nodes), out=out_ptr[1:])
    np.cumsum(np.bincount(tails, minlength=n_nodes), out=in_ptr[1:])
    d_out = np.bincount(heads, weights=w, minlength=n_nodes).astype(np.float64)
    d_in = np.bincount(tails, weights=w, minlength=n_nodes).astype(np.float64)
    keys = np.unique(fact_key(heads, rels, tails, n_nodes, n_relations))
    out_prob, out_alias = alias_tables(out_ptr, w[out_order])
    in_prob, in_alias = alias_tables(in_ptr, w[in_order])
    for a in (heads, rels, tails, w, out_order, in_order, out_ptr, in_ptr, d_out, d_in, keys):
        a.setflags(write=False)
    return RelGraph(
        n_nodes=int(n_nodes), n_relations=int(n_relations),
        heads=heads, relations=rels, tails=tails, weights=w,
        out_ptr=out_ptr, out_eid=out_order.astype(np.int64),
        in_ptr=in_ptr, in_eid=in_order.astype(np.int64),
        d_out=d_out, d_in=d_in, fact_keys=keys.astype(np.int64),
        out_prob=out_prob, out_alias=out_alias, in_prob=in_prob, in_alias=in_alias,
        origin=None if origin is None else np.asarray(origin, dtype=np.int64),
    )


def load_graph(paths, vocab: Vocabulary | None = None, *, with_weights: bool = True):
    """Convenience wrapper: read files and build the graph in one go."""
    vocab, triples, weights = load_triples(paths, vocab, with_weights=True)
    if not with_weights:
        weights = None
    graph = build_graph(triples, vocab.n_entities, vocab.n_relations, weights)
    return vocab, graph


def dump_graph(graph: RelGraph, path, vocab: Vocabulary | None = None, *, write_weights: bool = False) -> None:
    """Write the triple sequence back out in the input format."""
    ent = vocab.entities if vocab is not None else [str(i) for i in range(graph.n_nodes)]
    rel = vocab.relations if vocab is not None else [str(i) for i in range(graph.n_relations)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t, w in zip(graph.heads, graph.relations, graph.tails, graph.weights):
            line = f"{ent[h]}\t{rel[r]}\t{ent[t]}"
            if write_weights:
                line += f"\t{float(w)!r}"
            fh.write(line + "\n")


def induced_subgraph(graph: RelGraph, nodes) -> RelGraph:
    """Subgraph on `nodes` (parent indices) keeping every edge between them.

    Nodes are re-indexed in ascending parent order; `origin` maps back.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    remap = np.full(graph.n_nodes, -1, dtype=np.int64)
    remap[nodes] = np.arange(nodes.shape[0])
    keep = (remap[graph.heads] >= 0) & (remap[graph.tails] >= 0)
    sub = np.stack([remap[graph.heads[keep]], graph.relations[keep], remap[graph.tails[keep]]], axis=1)
    origin = nodes if graph.origin is None else graph.origin[nodes]
    return build_graph(sub, nodes.shape[0], graph.n_relations, graph.weights[keep], origin=origin)
