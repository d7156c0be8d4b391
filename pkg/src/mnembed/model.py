"""Embedding storage, bridging functions, edge scores and exact probabilities.

The exact (fully normalised) probabilities are test oracles only; training
never evaluates a full softmax.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product

import numpy as np

from .graph import RelGraph
from .sampling import StructureSample


class BridgeMode(str, enum.Enum):
    ADD = "addition"
    MUL = "multiplication"

    @classmethod
    def parse(cls, value) -> "BridgeMode":
        if isinstance(value, cls):
            return value
        aliases = {"add": cls.ADD, "addition": cls.ADD, "+": cls.ADD,
                   "mul": cls.MUL, "multiplication": cls.MUL, "*": cls.MUL}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown bridge mode {value!r}") from None

    @property
    def short(self) -> str:
        return "add" if self is BridgeMode.ADD else "mul"


@dataclass
class EmbeddingTable:
    """Per-node source/target vectors and per-relation vectors (all float64)."""

    source: np.ndarray
    target: np.ndarray
    relation: np.ndarray

    def __post_init__(self):
        d = self.source.shape[1]
        if self.target.shape[1] != d or self.relation.shape[1] != d:
            raise ValueError("source, target and relation matrices must share a dimension")
        if self.source.shape[0] != self.target.shape[0]:
            raise ValueError("source and target must have one row per node")

    @property
    def dim(self) -> int:
        return int(self.source.shape[1])

    @property
    def n_nodes(self) -> int:
        return int(self.source.shape[0])

    @property
    def n_relations(self) -> int:
        return int(self.relation.shape[0])

    @classmethod
    def zeros(cls, n_nodes: int, n_relations: int, dim: int) -> "EmbeddingTable":
        return cls(np.zeros((n_nodes, dim)), np.zeros((n_nodes, dim)), np.zeros((n_relations, dim)))

    @classmethod
    def random(cls, n_nodes: int, n_relations: int, dim: int, seed: int = 0) -> "EmbeddingTable":
        """Entries uniform in (-0.5/dim, 0.5/dim)."""
        rng = np.random.default_rng(seed)
        half = 0.5 / dim

        def draw(rows):
            return rng.uniform(-half, half, size=(rows, dim))

        return cls(draw(n_nodes), draw(n_nodes), draw(n_relations))

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.source.copy(), self.target.copy(), self.relation.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.source).all() and np.isfinite(self.target).all()
                    and np.isfinite(self.relation).all())

    def equals(self, other: "EmbeddingTable") -> bool:
        return (np.array_equal(self.source, other.source) and np.array_equal(self.target, other.target)
                and np.array_equal(self.relation, other.relation))


def _check_dims(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def bridge(u_i, u_r, mode: BridgeMode | str = BridgeMode.ADD) -> np.ndarray:
    """Combine a node vector with a relation vector.

    Addition returns ``u_i + u_r``; multiplication returns the rank-one
    product ``u_r u_r^T u_i``, computed as ``<u_r, u_i> * u_r``.
    """
    u_i = np.asarray(u_i, dtype=np.float64)
    u_r = np.asarray(u_r, dtype=np.float64)
    _check_dims(u_i, u_r)
    if BridgeMode.parse(mode) is BridgeMode.ADD:
        return u_i + u_r
    return np.dot(u_r, u_i) * u_r


def edge_score(u_target, bridged) -> float:
    """Inner product of a target vector with a bridged source vector."""
    u_target = np.asarray(u_target, dtype=np.float64)
    bridged = np.asarray(bridged, dtype=np.float64)
    _check_dims(u_target, bridged)
    return float(np.dot(u_target, bridged))


def triple_score(table: EmbeddingTable, mode, h: int, r: int, t: int) -> float:
    """Score of the directed edge (h, r, t): ``<u'_t, f(u_h, u_r)>``."""
    return edge_score(table.target[t], bridge(table.source[h], table.relation[r], mode))


def _logsumexp(x: np.ndarray) -> float:
    m = np.max(x)
    return float(m + np.log(np.sum(np.exp(x - m))))


def _out_edges(graph: RelGraph, i: int):
    eids = graph.out_eid[graph.out_ptr[i]:graph.out_ptr[i + 1]]
    return [(int(graph.heads[e]), int(graph.relations[e]), int(graph.tails[e])) for e in eids]


def _in_edges(graph: RelGraph, i: int):
    eids = graph.in_eid[graph.in_ptr[i]:graph.in_ptr[i + 1]]
    return [(int(graph.heads[e]), int(graph.relations[e]), int(graph.tails[e])) for e in eids]


def exact_p_out(graph: RelGraph, table: EmbeddingTable, mode, v_i: int, v_j: int, r_s: int) -> float:
    """Softmax probability of (v_i, r_s, v_j) among all edges leaving v_i."""
    if not graph.has_fact(v_i, r_s, v_j):
        raise ValueError(f"({v_i}, {r_s}, {v_j}) is not an edge")
    scores = np.array([triple_score(table, mode, *e) for e in _out_edges(graph, v_i)])
    return float(np.exp(triple_score(table, mode, v_i, r_s, v_j) - _logsumexp(scores)))


def exact_p_in(graph: RelGraph, table: EmbeddingTable, mode, v_i: int, v_j: int, r_s: int) -> float:
    """Softmax probability of (v_j, r_s, v_i) among all edges entering v_i."""
    if not graph.has_fact(v_j, r_s, v_i):
        raise ValueError(f"({v_j}, {r_s}, {v_i}) is not an edge")
    scores = np.array([triple_score(table, mode, *e) for e in _in_edges(graph, v_i)])
    return float(np.exp(triple_score(table, mode, v_j, r_s, v_i) - _logsumexp(scores)))


def case_pairs(graph: RelGraph, center: int, case: int) -> list[tuple[tuple, tuple]]:
    """Ordered edge pairs forming the denominator set of a case at `center`.

    Cases 1 and 3 exclude pairing an edge with itself; case 2 has no
    distinctness constraint.
    """
    outs = list(enumerate(_out_edges(graph, center)))
    ins = list(enumerate(_in_edges(graph, center)))
    if case == 1:
        first, second, distinct = outs, outs, True
    elif case == 2:
        first, second, distinct = ins, outs, False
    elif case == 3:
        first, second, distinct = ins, ins, True
    else:
        raise ValueError(f"case must be 1, 2 or 3, got {case}")
    return [(a, b) for (p, a), (q, b) in product(first, second) if not (distinct and p == q)]


def exact_case_probability(graph: RelGraph, table: EmbeddingTable, mode, sample: StructureSample) -> float:
    """Probability of the sample's edge pair under its case's pairwise softmax."""
    ej, ek = sample.edges()
    if not (graph.has_fact(*ej) and graph.has_fact(*ek)):
        raise ValueError("sample edges are not in the graph")
    if sample.case in (1, 3) and ej == ek and _multiplicity(graph, ej) < 2:
        raise ValueError("cases 1 and 3 need two distinct edges")
    pairs = case_pairs(graph, sample.center, sample.case)
    if not pairs:
        raise ValueError(f"center {sample.center} has no case-{sample.case} pair")
    logits = np.array([triple_score(table, mode, *a) + triple_score(table, mode, *b) for a, b in pairs])
    num = triple_score(table, mode, *ej) + triple_score(table, mode, *ek)
    return float(np.exp(num - _logsumexp(logits)))


def _multiplicity(graph: RelGraph, edge) -> int:
    h, r, t = edge
    return int(np.sum((graph.heads == h) & (graph.relations == r) & (graph.tails == t)))
