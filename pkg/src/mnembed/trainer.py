"""Negative-sampling SGD for MNE (both bridges), RLine and TransE.

Every step computes the exact gradient of its negative-sampling surrogate at
the current parameters (all slots first, then one application), so the
update code can be audited against finite differences through
:func:`check_gradients`.

MNE step at center i with structure (j-edge, k-edge) and K negatives
(v_n, r_l), writing s(e) for the score of edge e::

    L = w * [ log sig(s(e_j) + s(e_k)) + sum_m log sig(-s(e_j) - s(e_neg_m)) ]

where the negative edge replaces the k-slot: (i, r_l, v_n) for cases 1-2 and
(v_n, r_l, i) for case 3, and w is the case's weight product.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import threading
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from numba import njit

from .graph import RelGraph, alias_tables
from .model import BridgeMode, EmbeddingTable, triple_score
from .sampling import (
    NEGATIVE_RETRY_CAP,
    SamplingError,
    StructureSample,
    alias_draw,
    draw_negative,
    draw_structure,
    eligible_centers,
    has_fact,
    next_below,
    next_float,
    seed_state,
)

log = logging.getLogger(__name__)

MODELS = ("mne", "rline", "transe")
SCHEDULES = ("constant", "linear")
LR_FLOOR = 1e-4
ROW_NORM_CAP = 1e3
PROGRESS_EVERY = 1_000_000
SIGMOID_BOUND = 6.0
SIGMOID_BINS = 4096

OK, SATURATED, DIVERGED = 0, 1, 2
SRC, TGT, REL = 0, 1, 2
_MATRIX_NAMES = ("source", "target", "relation")


class DivergenceError(RuntimeError):
    def __init__(self, step: int, lr: float):
        super().__init__(f"non-finite or exploding parameters at step {step} (lr={lr:.3g})")
        self.step = step
        self.lr = lr


# ----------------------------------------------------------------------------
# sigmoid


def _make_sigmoid_table() -> np.ndarray:
    x = np.linspace(-SIGMOID_BOUND, SIGMOID_BOUND, SIGMOID_BINS + 1)
    tab = 1.0 / (1.0 + np.exp(-x))
    half = SIGMOID_BINS // 2
    tab[half] = 0.5
    # exact mirror symmetry: tab[N - k] = 1 - tab[k]
    tab[half + 1:] = 1.0 - tab[:half][::-1]
    return tab


SIGMOID_TABLE = _make_sigmoid_table()


@njit(cache=True, nogil=True)
def sigmoid_exact(x):
    if x >= 0.0:
        z = math.exp(-x)
        return 1.0 / (1.0 + z)
    z = math.exp(x)
    return z / (1.0 + z)


@njit(cache=True, nogil=True)
def sigmoid_fast(x, table):
    if x >= SIGMOID_BOUND:
        return 1.0
    if x <= -SIGMOID_BOUND:
        return 0.0
    pos = (x + SIGMOID_BOUND) * (SIGMOID_BINS / (2.0 * SIGMOID_BOUND))
    k = int(pos)
    if k >= SIGMOID_BINS:
        k = SIGMOID_BINS - 1
    frac = pos - k
    return table[k] + frac * (table[k + 1] - table[k])


@njit(cache=True, nogil=True)
def _sig(x, exact, table):
    if exact:
        return sigmoid_exact(x)
    return sigmoid_fast(x, table)


@njit(cache=True, nogil=True)
def log_sigmoid(x):
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


# ----------------------------------------------------------------------------
# shared gradient machinery


@njit(cache=True, nogil=True)
def _dot(a, b):
    s = 0.0
    for x in range(a.shape[0]):
        s += a[x] * b[x]
    return s


@njit(cache=True, nogil=True)
def _score(src, tgt, rel, h, r, t, mul):
    if mul:
        return _dot(rel[r], src[h]) * _dot(rel[r], tgt[t])
    return _dot(tgt[t], src[h]) + _dot(tgt[t], rel[r])


@njit(cache=True, nogil=True)
def _edge_grads(src, tgt, rel, eh, er, et, coef, n_edges, mul, G, gmat, grow):
    """Slot 3e/3e+1/3e+2 <- coef[e] * d s(e) / d(source h, target t, relation r)."""
    d = src.shape[1]
    for e in range(n_edges):
        h = eh[e]
        r = er[e]
        t = et[e]
        c = coef[e]
        s0 = 3 * e
        gmat[s0] = SRC
        grow[s0] = h
        gmat[s0 + 1] = TGT
        grow[s0 + 1] = t
        gmat[s0 + 2] = REL
        grow[s0 + 2] = r
        if mul:
            a = _dot(rel[r], src[h])
            b = _dot(rel[r], tgt[t])
            for x in range(d):
                G[s0, x] = c * b * rel[r, x]
                G[s0 + 1, x] = c * a * rel[r, x]
                G[s0 + 2, x] = c * (b * src[h, x] + a * tgt[t, x])
        else:
            for x in range(d):
                G[s0, x] = c * tgt[t, x]
                G[s0 + 1, x] = c * (src[h, x] + rel[r, x])
                G[s0 + 2, x] = c * tgt[t, x]


@njit(cache=True, nogil=True)
def _apply(src, tgt, rel, G, gmat, grow, n_slots, step, freeze_rel, cap2):
    """params[slot] += step * G[slot]; False if a touched row blows past cap2."""
    d = src.shape[1]
    ok = True
    for s in range(n_slots):
        m = gmat[s]
        if m == REL and freeze_rel:
            continue
        if m == SRC:
            row = src[grow[s]]
        elif m == TGT:
            row = tgt[grow[s]]
        else:
            row = rel[grow[s]]
        sq = 0.0
        for x in range(d):
            row[x] += step * G[s, x]
            sq += row[x] * row[x]
        if not sq <= cap2:
            ok = False
    return ok


@njit(cache=True, nogil=True)
def _mne_coefficients(src, tgt, rel, case, i, j, rj, k, rk, neg_n, neg_r, n_neg, weight,
                      mul, exact, table, eh, er, et, coef):
    """Fill the edge list (j-edge, k-edge, negatives) and return the surrogate."""
    if case == 1:
        eh[0], er[0], et[0] = i, rj, j
    else:
        eh[0], er[0], et[0] = j, rj, i
    if case == 3:
        eh[1], er[1], et[1] = k, rk, i
    else:
        eh[1], er[1], et[1] = i, rk, k
    s_j = _score(src, tgt, rel, eh[0], er[0], et[0], mul)
    s_k = _score(src, tgt, rel, eh[1], er[1], et[1], mul)
    z = s_j + s_k
    p = _sig(z, exact, table)
    value = log_sigmoid(z)
    c_j = 1.0 - p
    coef[1] = weight * (1.0 - p)
    for m in range(n_neg):
        e = m + 2
        if case == 3:
            eh[e], er[e], et[e] = neg_n[m], neg_r[m], i
        else:
            eh[e], er[e], et[e] = i, neg_r[m], neg_n[m]
        zm = s_j + _score(src, tgt, rel, eh[e], er[e], et[e], mul)
        pm = _sig(zm, exact, table)
        c_j -= pm
        coef[e] = -weight * pm
        value += log_sigmoid(-zm)
    coef[0] = weight * c_j
    return weight * value


@njit(cache=True, nogil=True)
def _rline_coefficients(src, tgt, rel, i, r, j, neg_n, neg_r, n_neg, mul, exact, table, eh, er, et, coef):
    eh[0], er[0], et[0] = i, r, j
    s = _score(src, tgt, rel, i, r, j, mul)
    coef[0] = 1.0 - _sig(s, exact, table)
    value = log_sigmoid(s)
    for m in range(n_neg):
        e = m + 1
        eh[e], er[e], et[e] = i, neg_r[m], neg_n[m]
        sm = _score(src, tgt, rel, i, neg_r[m], neg_n[m], mul)
        coef[e] = -_sig(sm, exact, table)
        value += log_sigmoid(-sm)
    return value


@njit(cache=True, nogil=True)
def _lr_at(t, total, eta0, decay):
    if not decay:
        return eta0
    eta = eta0 * (1.0 - t / total)
    floor = eta0 * LR_FLOOR
    return eta if eta > floor else floor


@njit(cache=True, nogil=True)
def _mne_chunk(src, tgt, rel, ga, eligible, rng, t_start, n_steps, total, eta0, decay, n_neg, mul,
               exact, table, freeze_rel, cap2, G, gmat, grow, eh, er, et, coef, neg_n, neg_r, stats):
    (heads, rels, tails, weights, out_ptr, out_eid, out_prob, out_alias,
     in_ptr, in_eid, in_prob, in_alias, fact_keys, n_nodes, n_rel) = ga
    n_elig = eligible.shape[0]
    for step in range(n_steps):
        t = t_start + step
        i = eligible[next_below(rng, n_elig)]
        case, ej, ek = draw_structure(ga, i, rng)
        if case == 1:
            j = tails[ej]
        else:
            j = heads[ej]
        if case == 3:
            k = heads[ek]
        else:
            k = tails[ek]
        incoming = case == 3
        for m in range(n_neg):
            nn, nr = draw_negative(fact_keys, n_nodes, n_rel, i, incoming, rng, NEGATIVE_RETRY_CAP)
            if nn < 0:
                return SATURATED, step, i
            neg_n[m] = nn
            neg_r[m] = nr
        weight = weights[ej] * weights[ek]
        value = _mne_coefficients(src, tgt, rel, case, i, j, rels[ej], k, rels[ek], neg_n, neg_r, n_neg,
                                  weight, mul, exact, table, eh, er, et, coef)
        n_edges = n_neg + 2
        _edge_grads(src, tgt, rel, eh, er, et, coef, n_edges, mul, G, gmat, grow)
        eta = _lr_at(t, total, eta0, decay)
        if not _apply(src, tgt, rel, G, gmat, grow, 3 * n_edges, eta, freeze_rel, cap2):
            return DIVERGED, step, t
        stats[0] += value
        stats[1] += 1.0
    return OK, n_steps, 0


@njit(cache=True, nogil=True)
def _rline_chunk(src, tgt, rel, ga, edge_prob, edge_alias, rng, t_start, n_steps, total, eta0, decay,
                 n_neg, mul, exact, table, freeze_rel, cap2, G, gmat, grow, eh, er, et, coef,
                 neg_n, neg_r, stats):
    (heads, rels, tails, weights, out_ptr, out_eid, out_prob, out_alias,
     in_ptr, in_eid, in_prob, in_alias, fact_keys, n_nodes, n_rel) = ga
    n_e = heads.shape[0]
    for step in range(n_steps):
        t = t_start + step
        e = alias_draw(edge_prob, edge_alias, 0, n_e, rng)
        i = heads[e]
        for m in range(n_neg):
            nn, nr = draw_negative(fact_keys, n_nodes, n_rel, i, False, rng, NEGATIVE_RETRY_CAP)
            if nn < 0:
                return SATURATED, step, i
            neg_n[m] = nn
            neg_r[m] = nr
        value = _rline_coefficients(src, tgt, rel, i, rels[e], tails[e], neg_n, neg_r, n_neg, mul, exact,
                                    table, eh, er, et, coef)
        n_edges = n_neg + 1
        _edge_grads(src, tgt, rel, eh, er, et, coef, n_edges, mul, G, gmat, grow)
        eta = _lr_at(t, total, eta0, decay)
        if not _apply(src, tgt, rel, G, gmat, grow, 3 * n_edges, eta, freeze_rel, cap2):
            return DIVERGED, step, t
        stats[0] += value
        stats[1] += 1.0
    return OK, n_steps, 0


# ----------------------------------------------------------------------------
# TransE


@njit(cache=True, nogil=True)
def _transe_gradient(ent, rel, h, r, t, h2, t2, margin, G, rows):
    """Hinge max(0, margin + |h+r-t| - |h2+r-t2|) and its gradient.

    Slots: 0 ent[h], 1 ent[t], 2 rel[r], 3 ent[h2], 4 ent[t2].
    Returns the loss (0 with zero gradient when the hinge is inactive).
    """
    d = ent.shape[1]
    rows[0], rows[1], rows[2], rows[3], rows[4] = h, t, r, h2, t2
    n1 = 0.0
    n2 = 0.0
    for x in range(d):
        a = ent[h, x] + rel[r, x] - ent[t, x]
        b = ent[h2, x] + rel[r, x] - ent[t2, x]
        G[0, x] = a
        G[3, x] = b
        n1 += a * a
        n2 += b * b
    n1 = math.sqrt(n1)
    n2 = math.sqrt(n2)
    loss = margin + n1 - n2
    if loss <= 0.0:
        for s in range(5):
            for x in range(d):
                G[s, x] = 0.0
        return 0.0
    inv1 = 1.0 / n1 if n1 > 0.0 else 0.0
    inv2 = 1.0 / n2 if n2 > 0.0 else 0.0
    for x in range(d):
        g1 = G[0, x] * inv1
        g2 = G[3, x] * inv2
        G[0, x] = g1
        G[1, x] = -g1
        G[2, x] = g1 - g2
        G[3, x] = -g2
        G[4, x] = g2
    return loss


@njit(cache=True, nogil=True)
def _normalize_row(row):
    sq = 0.0
    for x in range(row.shape[0]):
        sq += row[x] * row[x]
    if sq > 0.0:
        inv = 1.0 / math.sqrt(sq)
        for x in range(row.shape[0]):
            row[x] *= inv


@njit(cache=True, nogil=True)
def _transe_chunk(ent, rel, ga, edge_prob, edge_alias, rng, t_start, n_steps, total, eta0, decay, n_neg,
                  margin, freeze_rel, cap2, G, rows, stats):
    (heads, rels, tails, weights, out_ptr, out_eid, out_prob, out_alias,
     in_ptr, in_eid, in_prob, in_alias, fact_keys, n_nodes, n_rel) = ga
    n_e = heads.shape[0]
    d = ent.shape[1]
    for step in range(n_steps):
        t = t_start + step
        e = alias_draw(edge_prob, edge_alias, 0, n_e, rng)
        h = heads[e]
        r = rels[e]
        tl = tails[e]
        eta = _lr_at(t, total, eta0, decay)
        for m in range(n_neg):
            h2 = h
            t2 = tl
            found = False
            for _ in range(NEGATIVE_RETRY_CAP):
                h2 = h
                t2 = tl
                if next_float(rng) < 0.5:
                    h2 = next_below(rng, n_nodes)
                else:
                    t2 = next_below(rng, n_nodes)
                if not has_fact(fact_keys, n_nodes, n_rel, h2, r, t2):
                    found = True
                    break
            if not found:
                return SATURATED, step, h
            loss = _transe_gradient(ent, rel, h, r, tl, h2, t2, margin, G, rows)
            stats[0] -= loss
            if loss > 0.0:
                for s in range(5):
                    if s == 2:
                        if freeze_rel:
                            continue
                        row = rel[rows[s]]
                    else:
                        row = ent[rows[s]]
                    for x in range(d):
                        row[x] -= eta * G[s, x]
                for s in (0, 1, 3, 4):
                    _normalize_row(ent[rows[s]])
                sq = 0.0
                for x in range(d):
                    sq += rel[r, x] * rel[r, x]
                if not sq <= cap2:
                    return DIVERGED, step, t
        stats[1] += 1.0
    return OK, n_steps, 0


# ----------------------------------------------------------------------------
# configuration and reports


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run.

    `samples` of None means 200 * |E|. `margin` is required for, and only
    allowed with, ``model="transe"``. `freeze_relations` pins relation
    vectors at zero (RLine with frozen relations is LINE second order).
    """

    dim: int = 100
    lr: float = 0.025
    negatives: int = 5
    samples: int | None = None
    bridge: BridgeMode = BridgeMode.ADD
    model: str = "mne"
    margin: float | None = None
    seed: int = 1
    workers: int = 1
    lr_schedule: str = "linear"
    freeze_relations: bool = False
    exact_sigmoid: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bridge", BridgeMode.parse(self.bridge))
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.lr_schedule not in SCHEDULES:
            raise ValueError(f"lr_schedule must be one of {SCHEDULES}")
        if self.dim < 1 or self.negatives < 1 or self.workers < 1:
            raise ValueError("dim, negatives and workers must be >= 1")
        if self.samples is not None and self.samples < 0:
            raise ValueError("samples must be non-negative")
        if not (self.lr > 0 and math.isfinite(self.lr)):
            raise ValueError("lr must be positive")
        if (self.margin is not None) != (self.model == "transe"):
            raise ValueError("margin must be given exactly when model is 'transe'")
        if self.margin is not None and not self.margin > 0:
            raise ValueError("margin must be positive")

    def total_samples(self, graph: RelGraph) -> int:
        return 200 * graph.n_edges if self.samples is None else int(self.samples)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bridge"] = self.bridge.short
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes) -> "TrainConfig":
        return replace(self, **changes)


@dataclass
class TracePoint:
    wall_time: float
    samples: int
    lr: float
    objective: float


@dataclass
class TrainReport:
    """Outcome of a run. `trace` holds periodic mean surrogate values
    (log-likelihood for mne/rline, negated hinge loss for transe)."""

    config: TrainConfig
    table: EmbeddingTable
    samples_processed: int = 0
    wall_time: float = 0.0
    trace: list[TracePoint] = field(default_factory=list)


def initial_table(graph: RelGraph, config: TrainConfig) -> EmbeddingTable:
    if config.model == "transe":
        rng = np.random.default_rng(config.seed)
        bound = 6.0 / math.sqrt(config.dim)
        ent = rng.uniform(-bound, bound, size=(graph.n_nodes, config.dim))
        rel = rng.uniform(-bound, bound, size=(graph.n_relations, config.dim))
        ent /= np.maximum(np.linalg.norm(ent, axis=1, keepdims=True), 1e-12)
        rel /= np.maximum(np.linalg.norm(rel, axis=1, keepdims=True), 1e-12)
        if config.freeze_relations:
            rel[:] = 0.0
        return EmbeddingTable(ent, ent.copy(), rel)
    table = EmbeddingTable.random(graph.n_nodes, graph.n_relations, config.dim, config.seed)
    if config.freeze_relations:
        table.relation[:] = 0.0
    return table


def _worker_seed(seed: int, worker: int) -> int:
    if worker == 0:
        return seed
    return int.from_bytes(hashlib.sha256(f"{seed}:{worker}".encode()).digest()[:8], "little")


class _Progress:
    """Thread-safe trace aggregation shared by all workers."""

    def __init__(self, total: int, started: float):
        self.lock = threading.Lock()
        self.total = total
        self.started = started
        self.done = 0
        self.next_report = PROGRESS_EVERY
        self.trace: list[TracePoint] = []

    def record(self, n: int, lr: float, obj_sum: float, obj_count: float):
        with self.lock:
            self.done += n
            now = time.perf_counter() - self.started
            if self.trace and now <= self.trace[-1].wall_time:
                now = math.nextafter(self.trace[-1].wall_time, math.inf)
            objective = obj_sum / obj_count if obj_count else float("nan")
            self.trace.append(TracePoint(now, self.done, lr, objective))
            while self.done >= self.next_report:
                log.info("samples=%d lr=%.6g objective=%.6f", self.done, lr, objective)
                self.next_report += PROGRESS_EVERY


def _chunk_size(total: int) -> int:
    return int(max(1, min(100_000, math.ceil(total / 50))))


def _run_workers(config: TrainConfig, total: int, run_chunk) -> tuple[int, list[TracePoint]]:
    """Split `total` steps over workers; run_chunk(worker_state, t0, n) does the work."""
    started = time.perf_counter()
    progress = _Progress(total, started)
    errors: list[BaseException] = []
    decay = config.lr_schedule == "linear"

    def work(worker: int, t_begin: int, t_end: int):
        try:
            rng = seed_state(_worker_seed(config.seed, worker))
            scratch = {}
            chunk = _chunk_size(t_end - t_begin)
            t = t_begin
            while t < t_end and not errors:
                n = min(chunk, t_end - t)
                stats = np.zeros(2)
                run_chunk(rng, scratch, t, n, stats)
                t += n
                lr = config.lr * max(1.0 - t / total, LR_FLOOR) if decay else config.lr
                progress.record(n, lr, stats[0], stats[1])
        except BaseException as exc:  # re-raised in the caller thread
            errors.append(exc)

    bounds = np.linspace(0, total, config.workers + 1).astype(np.int64)
    if config.workers == 1:
        work(0, 0, total)
    else:
        threads = [threading.Thread(target=work, args=(w, int(bounds[w]), int(bounds[w + 1])))
                   for w in range(config.workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    if errors:
        raise errors[0]
    return progress.done, progress.trace


def _raise_status(status: int, info: int, config: TrainConfig, total: int):
    if status == SATURATED:
        raise SamplingError(f"negative sampling saturated at center {info} after {NEGATIVE_RETRY_CAP} draws")
    if status == DIVERGED:
        decay = config.lr_schedule == "linear"
        raise DivergenceError(int(info), float(_lr_at(info, total, config.lr, decay)))


def _scratch(scratch: dict, n_edges: int, dim: int, n_neg: int):
    if not scratch:
        scratch.update(
            G=np.zeros((3 * n_edges, dim)), gmat=np.zeros(3 * n_edges, np.int64),
            grow=np.zeros(3 * n_edges, np.int64), eh=np.zeros(n_edges, np.int64),
            er=np.zeros(n_edges, np.int64), et=np.zeros(n_edges, np.int64), coef=np.zeros(n_edges),
            neg_n=np.zeros(n_neg, np.int64), neg_r=np.zeros(n_neg, np.int64),
        )
    return scratch


def train_mne(graph: RelGraph, config: TrainConfig, table: EmbeddingTable | None = None) -> TrainReport:
    """Structure-sampling SGD for MNE with the configured bridge."""
    table = initial_table(graph, config) if table is None else table
    total = config.total_samples(graph)
    report = TrainReport(config, table)
    if total == 0:
        return report
    eligible = eligible_centers(graph)
    if eligible.size == 0:
        raise SamplingError("graph has no node with a valid two-edge structure")
    ga = graph.kernel_view()
    mul = config.bridge is BridgeMode.MUL
    K = config.negatives

    def run_chunk(rng, scratch, t0, n, stats):
        s = _scratch(scratch, K + 2, config.dim, K)
        status, _, info = _mne_chunk(
            table.source, table.target, table.relation, ga, eligible, rng, t0, n, float(total), config.lr,
            config.lr_schedule == "linear", K, mul, config.exact_sigmoid, SIGMOID_TABLE,
            config.freeze_relations, ROW_NORM_CAP ** 2, s["G"], s["gmat"], s["grow"], s["eh"], s["er"],
            s["et"], s["coef"], s["neg_n"], s["neg_r"], stats)
        _raise_status(status, info, config, total)

    start = time.perf_counter()
    report.samples_processed, report.trace = _run_workers(config, total, run_chunk)
    report.wall_time = time.perf_counter() - start
    return report


def _edge_alias(graph: RelGraph):
    return alias_tables(np.array([0, graph.n_edges]), graph.weights)


def train_rline(graph: RelGraph, config: TrainConfig, table: EmbeddingTable | None = None) -> TrainReport:
    """Edge-sampling SGD for RLine: one weight-proportional edge per step."""
    table = initial_table(graph, config) if table is None else table
    total = config.total_samples(graph)
    report = TrainReport(config, table)
    if total == 0:
        return report
    if graph.n_edges == 0:
        raise SamplingError("graph has no edges")
    ga = graph.kernel_view()
    prob, alias = _edge_alias(graph)
    mul = config.bridge is BridgeMode.MUL
    K = config.negatives

    def run_chunk(rng, scratch, t0, n, stats):
        s = _scratch(scratch, K + 1, config.dim, K)
        status, _, info = _rline_chunk(
            table.source, table.target, table.relation, ga, prob, alias, rng, t0, n, float(total),
            config.lr, config.lr_schedule == "linear", K, mul, config.exact_sigmoid, SIGMOID_TABLE,
            config.freeze_relations, ROW_NORM_CAP ** 2, s["G"], s["gmat"], s["grow"], s["eh"], s["er"],
            s["et"], s["coef"], s["neg_n"], s["neg_r"], stats)
        _raise_status(status, info, config, total)

    start = time.perf_counter()
    report.samples_processed, report.trace = _run_workers(config, total, run_chunk)
    report.wall_time = time.perf_counter() - start
    return report


def train_transe(graph: RelGraph, config: TrainConfig, table: EmbeddingTable | None = None) -> TrainReport:
    """Margin ranking on L2 energy with uniform head/tail corruption.

    Entity vectors live in `table.source`; `table.target` is set to the same
    values at the end so downstream featurisation sees one vector per node.
    """
    if config.margin is None:
        raise ValueError("TransE needs a margin")
    table = initial_table(graph, config) if table is None else table
    total = config.total_samples(graph)
    report = TrainReport(config, table)
    if total == 0:
        return report
    if graph.n_edges == 0:
        raise SamplingError("graph has no edges")
    ga = graph.kernel_view()
    prob, alias = _edge_alias(graph)

    def run_chunk(rng, scratch, t0, n, stats):
        if not scratch:
            scratch.update(G=np.zeros((5, config.dim)), rows=np.zeros(5, np.int64))
        status, _, info = _transe_chunk(
            table.source, table.relation, ga, prob, alias, rng, t0, n, float(total), config.lr,
            config.lr_schedule == "linear", config.negatives, float(config.margin), config.freeze_relations,
            ROW_NORM_CAP ** 2, scratch["G"], scratch["rows"], stats)
        _raise_status(status, info, config, total)

    start = time.perf_counter()
    report.samples_processed, report.trace = _run_workers(config, total, run_chunk)
    report.wall_time = time.perf_counter() - start
    table.target[:] = table.source
    return report


def train(graph: RelGraph, config: TrainConfig, table: EmbeddingTable | None = None) -> TrainReport:
    """Dispatch on ``config.model``."""
    fn = {"mne": train_mne, "rline": train_rline, "transe": train_transe}[config.model]
    return fn(graph, config, table)


# ----------------------------------------------------------------------------
# gradient audit


def _as_triples(neg_n, neg_r):
    return np.asarray(neg_n, dtype=np.int64), np.asarray(neg_r, dtype=np.int64)


def mne_gradients(table: EmbeddingTable, mode, sample: StructureSample, negatives, exact: bool = True):
    """Surrogate value and gradient (as {(matrix, row): vector}) for one step.

    Runs the same compiled code the trainer uses.
    """
    mul = BridgeMode.parse(mode) is BridgeMode.MUL
    neg_n, neg_r = _as_triples([n for n, _ in negatives], [r for _, r in negatives])
    K = len(negatives)
    s = _scratch({}, K + 2, table.dim, max(K, 1))
    value = _mne_coefficients(table.source, table.target, table.relation, sample.case, sample.center,
                              sample.j, sample.rel_j, sample.k, sample.rel_k, neg_n, neg_r, K,
                              float(sample.weight), mul, exact, SIGMOID_TABLE, s["eh"], s["er"], s["et"],
                              s["coef"])
    _edge_grads(table.source, table.target, table.relation, s["eh"], s["er"], s["et"], s["coef"], K + 2, mul,
                s["G"], s["gmat"], s["grow"])
    return value, _collect(s["G"], s["gmat"], s["grow"], 3 * (K + 2))


def rline_gradients(table: EmbeddingTable, mode, edge, negatives, exact: bool = True):
    mul = BridgeMode.parse(mode) is BridgeMode.MUL
    neg_n, neg_r = _as_triples([n for n, _ in negatives], [r for _, r in negatives])
    K = len(negatives)
    s = _scratch({}, K + 1, table.dim, max(K, 1))
    h, r, t = edge
    value = _rline_coefficients(table.source, table.target, table.relation, h, r, t, neg_n, neg_r, K, mul,
                                exact, SIGMOID_TABLE, s["eh"], s["er"], s["et"], s["coef"])
    _edge_grads(table.source, table.target, table.relation, s["eh"], s["er"], s["et"], s["coef"], K + 1, mul,
                s["G"], s["gmat"], s["grow"])
    return value, _collect(s["G"], s["gmat"], s["grow"], 3 * (K + 1))


def transe_gradients(table: EmbeddingTable, triple, corrupted, margin: float):
    """Hinge loss and its gradient for one (positive, corrupted) pair."""
    G = np.zeros((5, table.dim))
    rows = np.zeros(5, np.int64)
    h, r, t = triple
    h2, _, t2 = corrupted
    loss = _transe_gradient(table.source, table.relation, h, r, t, h2, t2, float(margin), G, rows)
    gmat = np.array([SRC, SRC, REL, SRC, SRC])
    return loss, _collect(G, gmat, rows, 5)


def _collect(G, gmat, grow, n_slots):
    grads: dict[tuple[str, int], np.ndarray] = {}
    for s in range(n_slots):
        key = (_MATRIX_NAMES[gmat[s]], int(grow[s]))
        if key in grads:
            grads[key] = grads[key] + G[s]
        else:
            grads[key] = G[s].copy()
    return grads


def _log_sig(x: float) -> float:
    return -float(np.logaddexp(0.0, -x))


def mne_surrogate(table: EmbeddingTable, mode, sample: StructureSample, negatives) -> float:
    """Negative-sampling surrogate for one structure sample, from model scores."""
    ej, ek = sample.edges()
    i = sample.center
    s_j = triple_score(table, mode, *ej)
    value = _log_sig(s_j + triple_score(table, mode, *ek))
    for n, r in negatives:
        neg = (n, r, i) if sample.case == 3 else (i, r, n)
        value += _log_sig(-(s_j + triple_score(table, mode, *neg)))
    return sample.weight * value


def rline_surrogate(table: EmbeddingTable, mode, edge, negatives) -> float:
    h, r, t = edge
    value = _log_sig(triple_score(table, mode, h, r, t))
    for n, rl in negatives:
        value += _log_sig(-triple_score(table, mode, h, rl, n))
    return value


def transe_loss(table: EmbeddingTable, triple, corrupted, margin: float) -> float:
    E, R = table.source, table.relation
    h, r, t = triple
    h2, _, t2 = corrupted
    return max(0.0, margin + float(np.linalg.norm(E[h] + R[r] - E[t])) - float(np.linalg.norm(E[h2] + R[r] - E[t2])))


def finite_difference_check(table: EmbeddingTable, func, grads: dict, epsilon: float = 1e-3,
                            floor: float = 1e-6) -> float:
    """Worst relative error between `grads` and central differences of func(table).

    Uses the fourth-order five-point stencil so truncation error stays far
    below round-off. Every coordinate of every row in `grads` is perturbed;
    the relative error of a coordinate is |a - n| / max(|a|, |n|, floor).
    """
    worst = 0.0
    for (name, row), analytic in grads.items():
        mat = getattr(table, name)
        for x in range(mat.shape[1]):
            old = mat[row, x]
            vals = []
            for step in (2.0, 1.0, -1.0, -2.0):
                mat[row, x] = old + step * epsilon
                vals.append(func(table))
            mat[row, x] = old
            numeric = (-vals[0] + 8.0 * vals[1] - 8.0 * vals[2] + vals[3]) / (12.0 * epsilon)
            err = abs(analytic[x] - numeric) / max(abs(analytic[x]), abs(numeric), floor)
            worst = max(worst, err)
    return worst


def check_gradients(graph: RelGraph | None, table: EmbeddingTable, mode, sample: StructureSample, negatives,
                    epsilon: float = 1e-3) -> float:
    """Max relative error of the trainer's MNE gradient vs central differences.

    `negatives` is a fixed list of (v_n, r_l) draws. The gradient is that of
    the surrogate being maximised. `graph` is only used to validate the sample.
    """
    if graph is not None:
        for e in sample.edges():
            if not graph.has_fact(*e):
                raise ValueError(f"sample edge {e} is not in the graph")
    _, grads = mne_gradients(table, mode, sample, negatives, exact=True)
    return finite_difference_check(table, lambda tb: mne_surrogate(tb, mode, sample, negatives), grads, epsilon)


def check_rline_gradients(table: EmbeddingTable, mode, edge, negatives, epsilon: float = 1e-3) -> float:
    _, grads = rline_gradients(table, mode, edge, negatives, exact=True)
    return finite_difference_check(table, lambda tb: rline_surrogate(tb, mode, edge, negatives), grads, epsilon)


def check_transe_gradients(table: EmbeddingTable, triple, corrupted, margin: float, epsilon: float = 1e-3) -> float:
    _, grads = transe_gradients(table, triple, corrupted, margin)
    return finite_difference_check(table, lambda tb: transe_loss(tb, triple, corrupted, margin), grads, epsilon)
