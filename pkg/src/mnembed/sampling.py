"""Stochastic draws used by training: centers, two-edge structures, negatives.

All draws go through a splitmix64 generator whose state is a one-element
uint64 array, so compiled kernels and the Python wrappers below consume the
exact same stream for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import RelGraph, alias_tables

NEGATIVE_RETRY_CAP = 100

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S32 = np.uint64(32)
_TWO_M53 = 1.0 / 9007199254740992.0

OUT = 0
IN = 1


class SamplingError(RuntimeError):
    pass


@njit(cache=True, nogil=True)
def next_u64(rng):
    rng[0] += _GOLDEN
    z = rng[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def next_float(rng):
    return np.float64(next_u64(rng) >> _S11) * _TWO_M53


@njit(cache=True, nogil=True)
def next_below(rng, n):
    # multiply-shift on the top 32 bits; n must be < 2**32
    return np.int64(((next_u64(rng) >> _S32) * np.uint64(n)) >> _S32)


@njit(cache=True, nogil=True)
def alias_draw(prob, alias, start, n, rng):
    """Draw a segment-local offset in [0, n) from the alias table at `start`."""
    q = next_below(rng, n)
    if next_float(rng) < prob[start + q]:
        return q
    return alias[start + q]


@njit(cache=True, nogil=True)
def alias_draw_excluding(prob, alias, start, n, weights, eids, skip, rng):
    """Like alias_draw but never returns offset `skip` (requires n >= 2).

    `weights[eids[start + q]]` is the weight of segment offset q.
    """
    for _ in range(64):
        q = alias_draw(prob, alias, start, n, rng)
        if q != skip:
            return q
    # heavy excluded edge: exact inverse-CDF draw on the remaining mass
    total = 0.0
    for q in range(n):
        if q != skip:
            total += weights[eids[start + q]]
    u = next_float(rng) * total
    acc = 0.0
    last = -1
    for q in range(n):
        if q != skip:
            acc += weights[eids[start + q]]
            last = q
            if u < acc:
                return q
    return last


@njit(cache=True, nogil=True)
def has_fact(fact_keys, n_nodes, n_rel, h, r, t):
    key = (h * n_rel + r) * n_nodes + t
    pos = np.searchsorted(fact_keys, key)
    return pos < fact_keys.shape[0] and fact_keys[pos] == key


@njit(cache=True, nogil=True)
def valid_cases(out_deg, in_deg):
    c1 = out_deg >= 2
    c2 = in_deg >= 1 and out_deg >= 1
    c3 = in_deg >= 2
    return c1, c2, c3


@njit(cache=True, nogil=True)
def draw_structure(ga, center, rng):
    """Return (case, eid_j, eid_k) for `center`, or (0, -1, -1) if none valid.

    Case 1: j and k both out-edges (distinct); case 2: j in-edge, k out-edge;
    case 3: j and k both in-edges (distinct).
    """
    (heads, rels, tails, weights, out_ptr, out_eid, out_prob, out_alias,
     in_ptr, in_eid, in_prob, in_alias, fact_keys, n_nodes, n_rel) = ga
    oa = out_ptr[center]
    no = out_ptr[center + 1] - oa
    ia = in_ptr[center]
    ni = in_ptr[center + 1] - ia
    c1, c2, c3 = valid_cases(no, ni)
    n_valid = np.int64(c1) + np.int64(c2) + np.int64(c3)
    if n_valid == 0:
        return 0, np.int64(-1), np.int64(-1)
    pick = next_below(rng, n_valid)
    if not c1:
        pick += 1
    if not c2 and pick >= 1:
        pick += 1
    case = pick + 1
    if case == 1:
        qj = alias_draw(out_prob, out_alias, oa, no, rng)
        qk = alias_draw_excluding(out_prob, out_alias, oa, no, weights, out_eid, qj, rng)
        return 1, out_eid[oa + qj], out_eid[oa + qk]
    if case == 2:
        qj = alias_draw(in_prob, in_alias, ia, ni, rng)
        qk = alias_draw(out_prob, out_alias, oa, no, rng)
        return 2, in_eid[ia + qj], out_eid[oa + qk]
    qj = alias_draw(in_prob, in_alias, ia, ni, rng)
    qk = alias_draw_excluding(in_prob, in_alias, ia, ni, weights, in_eid, qj, rng)
    return 3, in_eid[ia + qj], in_eid[ia + qk]


@njit(cache=True, nogil=True)
def draw_negative(fact_keys, n_nodes, n_rel, center, incoming, rng, cap):
    """Uniform (node, relation) whose triple with `center` is not a fact.

    Returns (-1, -1) when `cap` consecutive draws were all facts.
    """
    for _ in range(cap):
        n = next_below(rng, n_nodes)
        r = next_below(rng, n_rel)
        if incoming:
            if not has_fact(fact_keys, n_nodes, n_rel, n, r, center):
                return n, r
        elif not has_fact(fact_keys, n_nodes, n_rel, center, r, n):
            return n, r
    return np.int64(-1), np.int64(-1)


def eligible_centers(graph: RelGraph) -> np.ndarray:
    """Nodes with at least one valid two-edge case."""
    out_deg = np.diff(graph.out_ptr)
    in_deg = np.diff(graph.in_ptr)
    ok = (out_deg >= 2) | ((in_deg >= 1) & (out_deg >= 1)) | (in_deg >= 2)
    return np.flatnonzero(ok).astype(np.int64)


def seed_state(seed: int) -> np.ndarray:
    """Fresh generator state for `seed` (any Python int)."""
    return np.array([np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)


@dataclass
class SamplerState:
    """Per-worker sampler: generator state plus the center/relation supports.

    Centers are uniform over `eligible`; negative relations are uniform over
    all relations.
    """

    rng: np.ndarray
    eligible: np.ndarray
    n_relations: int

    @classmethod
    def for_graph(cls, graph: RelGraph, seed: int) -> "SamplerState":
        return cls(seed_state(seed), eligible_centers(graph), graph.n_relations)

    def node_distribution(self, n_nodes: int) -> np.ndarray:
        p = np.zeros(n_nodes)
        if self.eligible.size:
            p[self.eligible] = 1.0 / self.eligible.size
        return p

    def relation_distribution(self) -> np.ndarray:
        return np.full(self.n_relations, 1.0 / self.n_relations)


@dataclass(frozen=True)
class StructureSample:
    """Two incident edges at `center` realising one of the three cases.

    `j`/`k` are the far endpoints, `rel_j`/`rel_k` the edge relations, and
    `eid_j`/`eid_k` the graph edge ids. Directions are implied by the case
    (see `directions`).
    """

    case: int
    center: int
    j: int
    rel_j: int
    k: int
    rel_k: int
    weight: float
    eid_j: int = -1
    eid_k: int = -1

    @property
    def directions(self) -> tuple[str, str]:
        return {1: ("out", "out"), 2: ("in", "out"), 3: ("in", "in")}[self.case]

    def edges(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        """The two edges as (head, relation, tail)."""
        i = self.center
        ej = (i, self.rel_j, self.j) if self.case == 1 else (self.j, self.rel_j, i)
        ek = (self.k, self.rel_k, i) if self.case == 3 else (i, self.rel_k, self.k)
        return ej, ek

    @property
    def negative_direction(self) -> int:
        """Direction of the slot replaced by negatives: incoming only for case 3."""
        return IN if self.case == 3 else OUT


def structure_from_edges(graph: RelGraph, case: int, center: int, eid_j: int, eid_k: int) -> StructureSample:
    h, r, t, w = graph.heads, graph.relations, graph.tails, graph.weights
    j = int(t[eid_j]) if case == 1 else int(h[eid_j])
    k = int(h[eid_k]) if case == 3 else int(t[eid_k])
    return StructureSample(case, int(center), j, int(r[eid_j]), k, int(r[eid_k]),
                           float(w[eid_j] * w[eid_k]), int(eid_j), int(eid_k))


def sample_center(graph: RelGraph, state: SamplerState) -> int:
    if state.eligible.size == 0:
        raise SamplingError("graph has no node with a valid two-edge structure")
    return int(state.eligible[next_below(state.rng, state.eligible.size)])


def sample_structure(graph: RelGraph, state: SamplerState, center: int) -> StructureSample:
    case, ej, ek = draw_structure(graph.kernel_view(), np.int64(center), state.rng)
    if case == 0:
        raise SamplingError(f"node {center} has no valid case")
    return structure_from_edges(graph, case, center, ej, ek)


def sample_negative(graph: RelGraph, state: SamplerState, center: int, direction: int | str = OUT,
                    cap: int = NEGATIVE_RETRY_CAP) -> tuple[int, int]:
    """Uniform (v_n, r_l) such that the triple it forms with `center` is not a fact.

    `direction` "out" rejects (center, r_l, v_n) facts, "in" rejects
    (v_n, r_l, center) facts.
    """
    incoming = direction in (IN, "in")
    n, r = draw_negative(graph.fact_keys, np.int64(graph.n_nodes), np.int64(graph.n_relations),
                         np.int64(center), incoming, state.rng, cap)
    if n < 0:
        raise SamplingError(f"negative sampling saturated at center {center} after {cap} draws")
    return int(n), int(r)


class AliasTable:
    """Constant-time draws from a fixed discrete distribution."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be a non-empty 1-d array with positive mass")
        self.size = w.size
        self.prob, self.alias = alias_tables(np.array([0, w.size]), w)

    def draw(self, rng: np.ndarray) -> int:
        return int(alias_draw(self.prob, self.alias, 0, self.size, rng))

    def probabilities(self) -> np.ndarray:
        """Distribution implied by the table (for audits)."""
        p = self.prob / self.size
        out = p.copy()
        np.add.at(out, self.alias, (1.0 - self.prob) / self.size)
        return out


__all__ = [
    "AliasTable", "SamplerState", "SamplingError", "StructureSample",
    "eligible_centers", "sample_center", "sample_negative", "sample_structure", "seed_state",
]
