"""Downstream evaluation: triplet classification, link prediction, sweeps.

Both tasks are balanced binary problems solved by logistic regression on
``[source(h) | relation(r) | target(t)]`` features.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .census import filter_by_trinode_ratio
from .classifier import ClassifierConfig, accuracy, fit
from .graph import RelGraph, build_graph
from .model import EmbeddingTable
from .trainer import TrainConfig, train

FACT, SAMPLED_NONFACT, CORRUPTED_HEAD, CORRUPTED_TAIL = "fact", "sampled-nonfact", "corrupted-head", "corrupted-tail"
CSV_FIELDS = ("task", "model", "bridge", "dim", "ratio", "split", "seed", "accuracy", "train_seconds")


class SplitError(ValueError):
    pass


def featurize(table: EmbeddingTable, triple) -> np.ndarray:
    h, r, t = (int(v) for v in triple)
    for idx, bound, what in ((h, table.n_nodes, "head"), (r, table.n_relations, "relation"),
                             (t, table.n_nodes, "tail")):
        if not 0 <= idx < bound:
            raise IndexError(f"{what} index {idx} out of range [0, {bound})")
    return np.concatenate([table.source[h], table.relation[r], table.target[t]])


def featurize_many(table: EmbeddingTable, triples: np.ndarray, dtype=np.float32) -> np.ndarray:
    """Row-wise featurize; float32 by default to keep benchmark-size matrices in memory."""
    tr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    if tr.size and (tr[:, [0, 2]].min() < 0 or tr[:, [0, 2]].max() >= table.n_nodes
                    or tr[:, 1].min() < 0 or tr[:, 1].max() >= table.n_relations):
        raise IndexError("triple index out of range")
    d = table.dim
    out = np.empty((len(tr), 3 * d), dtype=dtype)
    out[:, :d] = table.source[tr[:, 0]]
    out[:, d:2 * d] = table.relation[tr[:, 1]]
    out[:, 2 * d:] = table.target[tr[:, 2]]
    return out


@dataclass
class LabeledTripleSet:
    triples: np.ndarray
    labels: np.ndarray
    provenance: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def audit(self, reference: RelGraph) -> None:
        """Raise unless positives are facts, negatives are not, and classes balance."""
        is_fact = reference.contains(self.triples)
        pos = self.labels == 1
        if not is_fact[pos].all():
            raise AssertionError("a positive triple is not a fact")
        if is_fact[~pos].any():
            raise AssertionError("a negative triple is a fact")
        if pos.sum() != (~pos).sum():
            raise AssertionError("positive and negative counts differ")

    def subset(self, idx) -> "LabeledTripleSet":
        return LabeledTripleSet(self.triples[idx], self.labels[idx], self.provenance[idx])

    @staticmethod
    def concat(a: "LabeledTripleSet", b: "LabeledTripleSet") -> "LabeledTripleSet":
        return LabeledTripleSet(np.concatenate([a.triples, b.triples]), np.concatenate([a.labels, b.labels]),
                                np.concatenate([a.provenance, b.provenance]))


@dataclass
class EvalResult:
    task: str
    model: str
    bridge: str
    dim: int
    accuracy: float
    split: float
    seed: int
    ratio: float | None = None
    train_seconds: float = 0.0
    eval_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        d = asdict(self)
        return {k: ("" if d[k] is None else d[k]) for k in CSV_FIELDS}


def model_name(config: TrainConfig) -> str:
    if config.model == "transe":
        return "transe"
    return f"{config.model}{'+' if config.bridge.short == 'add' else '*'}"


def model_config(name: str, base: TrainConfig, margin: float = 1.0) -> TrainConfig:
    """Config for a short model name: mne+, mne*, rline+, rline*, transe."""
    name = name.strip().lower()
    if name == "transe":
        return base.replace(model="transe", margin=base.margin or margin)
    if len(name) > 1 and name[-1] in "+*" and name[:-1] in ("mne", "rline"):
        return base.replace(model=name[:-1], bridge="add" if name[-1] == "+" else "mul", margin=None)
    raise ValueError(f"unknown model name {name!r}")


# ----------------------------------------------------------------------------
# negatives


def sample_nonfacts(reference: RelGraph, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` distinct uniform (h, r, t) triples that are not facts of `reference`."""
    V, R = reference.n_nodes, reference.n_relations
    space = V * V * R
    if count > space - len(reference.unique_triples()):
        raise ValueError("not enough non-facts to sample from")
    chosen = np.zeros(0, dtype=np.int64)
    while chosen.size < count:
        need = count - chosen.size
        keys = rng.integers(0, space, size=int(need * 1.1) + 16)
        cand = np.stack([keys // (R * V), (keys // V) % R, keys % V], axis=1)
        keys = keys[~reference.contains(cand)]
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]  # dedupe within the batch, keep draw order
        keys = keys[~np.isin(keys, chosen)]
        chosen = np.concatenate([chosen, keys[:need]])
    return np.stack([chosen // (R * V), (chosen // V) % R, chosen % V], axis=1)


def corrupt(reference: RelGraph, triples: np.ndarray, rng: np.random.Generator,
            max_rounds: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Replace head or tail (50/50) uniformly until the result is not a fact.

    Returns (corrupted triples, provenance).
    """
    out = np.array(triples, dtype=np.int64).reshape(-1, 3)
    heads = rng.random(len(out)) < 0.5
    col = np.where(heads, 0, 2)
    pending = np.arange(len(out))
    for _ in range(max_rounds):
        if pending.size == 0:
            break
        out[pending, col[pending]] = rng.integers(0, reference.n_nodes, size=pending.size)
        pending = pending[reference.contains(out[pending])]
    else:
        raise RuntimeError("could not corrupt some triples into non-facts")
    return out, np.where(heads, CORRUPTED_HEAD, CORRUPTED_TAIL)


def triplet_dataset(graph: RelGraph, seed: int) -> LabeledTripleSet:
    pos = graph.unique_triples()
    neg = sample_nonfacts(graph, len(pos), np.random.default_rng(seed))
    return LabeledTripleSet(np.concatenate([pos, neg]),
                            np.concatenate([np.ones(len(pos), np.int64), np.zeros(len(neg), np.int64)]),
                            np.array([FACT] * len(pos) + [SAMPLED_NONFACT] * len(neg)))


def _fit_and_score(table, train_set, test_set, clf_config):
    model = fit(featurize_many(table, train_set.triples), train_set.labels, clf_config)
    return accuracy(model, featurize_many(table, test_set.triples), test_set.labels)


# ----------------------------------------------------------------------------
# tasks


def eval_triplet_classification(graph: RelGraph, table: EmbeddingTable, split: float = 0.8, seed: int = 0,
                                classifier: ClassifierConfig | None = None, model: str = "",
                                bridge: str = "") -> EvalResult:
    """Classify facts vs uniform non-facts with a random split x : 1 - x."""
    started = time.perf_counter()
    data = triplet_dataset(graph, seed)
    order = np.random.default_rng(seed + 1).permutation(len(data))
    n_train = int(round(split * len(data)))
    if not 0 < n_train < len(data):
        raise SplitError(f"split {split} leaves an empty side for {len(data)} examples")
    clf = classifier or ClassifierConfig(seed=seed)
    acc = _fit_and_score(table, data.subset(order[:n_train]), data.subset(order[n_train:]), clf)
    return EvalResult("triplet-classification", model, bridge, table.dim, acc, split, seed,
                      eval_seconds=time.perf_counter() - started)


def coverage_split(graph: RelGraph, train_fraction: float = 0.8, seed: int = 0):
    """Split the distinct facts so every non-isolated node touches a train edge.

    A greedy pass over a random permutation reserves an edge for train
    whenever it covers a new endpoint; the rest of the train quota is filled
    randomly. Returns (train_triples, test_triples).
    """
    facts = graph.unique_triples()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(facts))
    covered = np.zeros(graph.n_nodes, dtype=bool)
    reserved = np.zeros(len(facts), dtype=bool)
    for e in order:
        h, _, t = facts[e]
        if not (covered[h] and covered[t]):
            reserved[e] = True
            covered[h] = covered[t] = True
    quota = int(round(train_fraction * len(facts)))
    rest = order[~reserved[order]]
    fill = max(0, quota - int(reserved.sum()))
    in_train = reserved.copy()
    in_train[rest[:fill]] = True
    if in_train.all():
        raise SplitError("node coverage leaves no edge for the test split")
    if not in_train.any():
        raise SplitError("empty train split")
    return facts[in_train], facts[~in_train]


def eval_link_prediction(graph: RelGraph, config: TrainConfig, seed: int = 0,
                         classifier: ClassifierConfig | None = None, split: float = 0.8,
                         embed: Callable[[RelGraph], EmbeddingTable] | None = None) -> EvalResult:
    """Held-out facts vs head/tail corruptions, embeddings trained on the train split only.

    `embed` overrides training (it receives the train graph); by default the
    trainer runs with `config`.
    """
    train_facts, test_facts = coverage_split(graph, split, seed)
    train_graph = build_graph(train_facts, graph.n_nodes, graph.n_relations)
    started = time.perf_counter()
    table = embed(train_graph) if embed is not None else train(train_graph, config).table
    train_seconds = time.perf_counter() - started
    started = time.perf_counter()
    rng = np.random.default_rng(seed + 1)

    def labeled(facts):
        neg, prov = corrupt(graph, facts, rng)
        n = len(facts)
        return LabeledTripleSet(np.concatenate([facts, neg]),
                                np.concatenate([np.ones(n, np.int64), np.zeros(n, np.int64)]),
                                np.concatenate([np.array([FACT] * n), prov]))

    train_set, test_set = labeled(train_facts), labeled(test_facts)
    clf = classifier or ClassifierConfig(seed=seed)
    acc = _fit_and_score(table, train_set, test_set, clf)
    return EvalResult("link-prediction", model_name(config), config.bridge.short, table.dim, acc, split, seed,
                      train_seconds=train_seconds, eval_seconds=time.perf_counter() - started,
                      extra={"n_train": len(train_facts), "n_test": len(test_facts)})


def run_task(graph: RelGraph, config: TrainConfig, task: str, seed: int = 0, split: float = 0.8,
             classifier: ClassifierConfig | None = None) -> EvalResult:
    """Train then evaluate. `task` is "tc" (triplet classification) or "lp"."""
    if task == "lp":
        return eval_link_prediction(graph, config, seed, classifier, split)
    if task != "tc":
        raise ValueError(f"task must be 'tc' or 'lp', got {task!r}")
    started = time.perf_counter()
    table = train(graph, config).table
    elapsed = time.perf_counter() - started
    result = eval_triplet_classification(graph, table, split, seed, classifier, model_name(config),
                                         config.bridge.short)
    result.train_seconds = elapsed
    return result


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def sweep_dimension(graph: RelGraph, dims: Sequence[int], task: str, base: TrainConfig, seed: int = 0,
                    split: float = 0.8, classifier: ClassifierConfig | None = None,
                    jobs: int = 1) -> list[EvalResult]:
    if not dims:
        raise ValueError("dims must be non-empty")
    return _map(lambda d: run_task(graph, base.replace(dim=int(d)), task, seed, split, classifier), list(dims), jobs)


def sweep_trinode_ratio(graph: RelGraph, ratios: Sequence[float], models: Sequence[str], base: TrainConfig,
                        seed: int = 0, split: float = 0.8, classifier: ClassifierConfig | None = None,
                        jobs: int = 1) -> list[EvalResult]:
    """Triplet classification on tri-node-ratio filtered subgraphs for each model."""
    subgraphs = {r: filter_by_trinode_ratio(graph, r, seed) for r in ratios}
    jobs_list = [(r, m) for r in ratios for m in models]

    def one(item):
        r, m = item
        res = run_task(subgraphs[r], model_config(m, base), "tc", seed, split, classifier)
        res.ratio = r
        res.model = m
        return res

    return _map(one, jobs_list, jobs)


def results_csv(results: Sequence[EvalResult]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row())
    return buf.getvalue()


def results_tsv(results: Sequence[EvalResult], x: str) -> str:
    """Plot-ready series: one column per model, rows keyed by `x` ("dim" or "ratio")."""
    models = list(dict.fromkeys(r.model for r in results))
    xs = list(dict.fromkeys(getattr(r, x) for r in results))
    table = {(getattr(r, x), r.model): r.accuracy for r in results}
    lines = ["\t".join([x, *models])]
    for v in xs:
        lines.append("\t".join([str(v), *(f"{table[(v, m)]:.6f}" if (v, m) in table else "" for m in models)]))
    return "\n".join(lines) + "\n"
