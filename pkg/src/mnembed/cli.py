"""Command-line entry point.

Settings resolve as defaults < ``--config`` file (``key = value`` lines) <
explicit flags. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .census import census
from .checkpoint import KINDS, load_checkpoint, save_checkpoint
from .classifier import ClassifierConfig
from .evaluation import (eval_triplet_classification, model_name, results_csv, results_tsv, run_task,
                         sweep_dimension, sweep_trinode_ratio)
from .graph import load_graph
from .trainer import MODELS, SCHEDULES, TrainConfig, train

log = logging.getLogger("mnembed")

COMMANDS = ("census", "train", "eval-tc", "eval-lp", "sweep-dim", "sweep-tri", "dump-embeddings")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text in (None, "", "none", "None") else int(text)


def _optional_float(text):
    return None if text in (None, "", "none", "None") else float(text)


@dataclass
class RunConfig:
    """Every setting a subcommand can consume."""

    command: str = ""
    graph: list = field(default_factory=list)
    out: str | None = None
    checkpoint: str | None = None
    model: str = "mne"
    bridge: str = "add"
    dim: int = 100
    lr: float = 0.025
    negatives: int = 5
    samples: int | None = None
    margin: float | None = None
    threads: int = 1
    seed: int = 1
    lr_schedule: str = "linear"
    task: str = "tc"
    split: float = 0.8
    dims: list = field(default_factory=lambda: [2, 5, 10, 20, 50, 100])
    ratios: list = field(default_factory=list)
    models: list = field(default_factory=lambda: ["mne+", "transe"])
    epochs: int = 50
    clf_lr: float = 0.01
    l2: float = 1e-4
    standardize: bool = False
    exact_limit: int = 200_000
    sample_budget: int = 200_000
    any_relation: bool = False
    kind: str = "all"
    jobs: int = 1

    def train_config(self) -> TrainConfig:
        margin = self.margin
        if self.model == "transe" and margin is None:
            margin = 1.0
        if self.model != "transe":
            margin = None
        return TrainConfig(dim=self.dim, lr=self.lr, negatives=self.negatives, samples=self.samples,
                           bridge=self.bridge, model=self.model, margin=margin, seed=self.seed,
                           workers=self.threads, lr_schedule=self.lr_schedule)

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(epochs=self.epochs, lr=self.clf_lr, l2=self.l2, standardize=self.standardize,
                                seed=self.seed)


_PARSERS = {
    "graph": lambda v: v if isinstance(v, list) else _str_list(v),
    "out": str, "checkpoint": str, "model": str, "bridge": str, "dim": int, "lr": float,
    "negatives": int, "samples": _optional_int, "margin": _optional_float, "threads": int, "seed": int,
    "lr_schedule": str, "task": str, "split": float, "dims": _int_list, "ratios": _float_list,
    "models": _str_list, "epochs": int, "clf_lr": float, "l2": float, "standardize": _bool,
    "exact_limit": int, "sample_budget": int, "any_relation": _bool, "kind": str, "jobs": int,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)} - {"command"}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment. Keys may use '-' or '_'."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    cfg = RunConfig(command=command)
    for source in (file_values, flag_values):
        for key, raw in source.items():
            if raw is None:
                continue
            try:
                setattr(cfg, key, _PARSERS[key](raw))
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.model not in MODELS:
        raise UsageError(f"--model must be one of {', '.join(MODELS)}")
    if cfg.bridge not in ("add", "mul"):
        raise UsageError("--bridge must be add or mul")
    if cfg.lr_schedule not in SCHEDULES:
        raise UsageError(f"lr_schedule must be one of {', '.join(SCHEDULES)}")
    if cfg.task not in ("tc", "lp"):
        raise UsageError("--task must be tc or lp")
    if cfg.kind not in (*KINDS, "all"):
        raise UsageError(f"--kind must be one of {', '.join(KINDS)} or all")
    if cfg.margin is not None and cfg.model != "transe":
        raise UsageError("--margin only applies to --model transe")
    try:
        cfg.train_config()
        cfg.classifier_config()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 < cfg.split < 1:
        raise UsageError("--split must lie in (0, 1)")
    needs_graph = cfg.command not in ("dump-embeddings",)
    if needs_graph and not cfg.graph:
        raise UsageError("--graph is required")
    if cfg.command == "train" and not cfg.out:
        raise UsageError("train needs --out <checkpoint-dir>")
    if cfg.command == "dump-embeddings" and not cfg.checkpoint:
        raise UsageError("dump-embeddings needs --checkpoint <dir>")
    if cfg.command == "sweep-tri" and not cfg.ratios:
        raise UsageError("sweep-tri needs --ratios")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    s = argparse.SUPPRESS
    add = common.add_argument
    add("--config", metavar="PATH", help="key = value settings file (flags override)")
    add("--graph", action="append", default=None, help="triple file (repeatable)")
    add("--out", default=s, help="output file or directory")
    add("--checkpoint", default=s, help="checkpoint directory to read")
    add("--model", default=s, choices=MODELS)
    add("--bridge", default=s, choices=("add", "mul"))
    add("--dim", type=int, default=s)
    add("--lr", type=float, default=s)
    add("--negatives", type=int, default=s)
    add("--samples", type=int, default=s)
    add("--margin", type=float, default=s)
    add("--threads", type=int, default=s)
    add("--seed", type=int, default=s)
    add("--lr-schedule", dest="lr_schedule", default=s, choices=SCHEDULES)
    add("--task", default=s, choices=("tc", "lp"))
    add("--split", type=float, default=s)
    add("--dims", default=s, help="comma-separated dimensions")
    add("--ratios", default=s, help="comma-separated tri-node ratios")
    add("--models", default=s, help="comma-separated model names, e.g. mne+,mne*,transe")
    add("--epochs", type=int, default=s, help="classifier epochs")
    add("--clf-lr", dest="clf_lr", type=float, default=s)
    add("--l2", type=float, default=s)
    add("--standardize", action="store_const", const=True, default=s)
    add("--exact-limit", dest="exact_limit", type=int, default=s)
    add("--sample-budget", dest="sample_budget", type=int, default=s)
    add("--any-relation", dest="any_relation", action="store_const", const=True, default=s)
    add("--kind", default=s, choices=(*KINDS, "all"))
    add("--jobs", type=int, default=s, help="parallel configurations in sweeps")
    add("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="mnembed", description="Multi-relational network embedding toolkit.")
    parser.add_argument("--version", action="version", version=f"mnembed {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_args(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if not ns.command:
        raise UsageError("a subcommand is required")
    flags = {k: v for k, v in vars(ns).items() if k in _PARSERS}
    file_values = read_config_file(ns.config) if ns.config else {}
    cfg = resolve(ns.command, file_values, flags)
    cfg_quiet = getattr(ns, "quiet", False)
    logging.basicConfig(level=logging.WARNING if cfg_quiet else logging.INFO, stream=sys.stderr,
                        format="%(message)s", force=True)
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(cfg: RunConfig):
    vocab, graph = load_graph(cfg.graph)
    log.info("loaded %d nodes, %d relations, %d edges", graph.n_nodes, graph.n_relations, graph.n_edges)
    return vocab, graph


def run(cfg: RunConfig) -> None:
    cmd = cfg.command
    if cmd == "dump-embeddings":
        ck = Path(cfg.checkpoint)
        kinds = KINDS if cfg.kind == "all" else (cfg.kind,)
        load_checkpoint(ck)  # validates the directory
        _emit("".join((ck / f"{k}.emb").read_text(encoding="utf-8") for k in kinds), cfg.out)
        return
    vocab, graph = _load(cfg)
    tc = cfg.train_config()
    clf = cfg.classifier_config()
    if cmd == "census":
        result = census(graph, not cfg.any_relation, cfg.exact_limit, cfg.sample_budget, cfg.seed)
        _emit(result.to_tsv(), cfg.out)
    elif cmd == "train":
        report = train(graph, tc)
        save_checkpoint(cfg.out, report.table, tc, vocab)
        log.info("wrote checkpoint to %s (%.1fs)", cfg.out, report.wall_time)
    elif cmd == "eval-tc":
        if cfg.checkpoint:
            ck = load_checkpoint(cfg.checkpoint)
            if ck.entity_labels != vocab.entities or ck.relation_labels != vocab.relations:
                raise RuntimeError("checkpoint labels do not match the graph")
            tc = ck.config
            result = eval_triplet_classification(graph, ck.table, cfg.split, cfg.seed, clf, model_name(tc),
                                                 tc.bridge.short)
        else:
            result = run_task(graph, tc, "tc", cfg.seed, cfg.split, clf)
        _emit(results_csv([result]), cfg.out)
    elif cmd == "eval-lp":
        _emit(results_csv([run_task(graph, tc, "lp", cfg.seed, cfg.split, clf)]), cfg.out)
    elif cmd == "sweep-dim":
        results = sweep_dimension(graph, cfg.dims, cfg.task, tc, cfg.seed, cfg.split, clf, cfg.jobs)
        _write_sweep(results, "dim", cfg.out)
    elif cmd == "sweep-tri":
        results = sweep_trinode_ratio(graph, cfg.ratios, cfg.models, tc, cfg.seed, cfg.split, clf, cfg.jobs)
        _write_sweep(results, "ratio", cfg.out)


def _write_sweep(results, x: str, out: str | None) -> None:
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "results.csv").write_text(results_csv(results), encoding="utf-8")
        (d / f"curve_{x}.tsv").write_text(results_tsv(results, x), encoding="utf-8")
    else:
        sys.stdout.write(results_csv(results))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if not argv:
            raise UsageError("no command given")
        cfg = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        run(cfg)
    except (OSError, ValueError, RuntimeError, KeyError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
