"""Text checkpoints: three embedding files plus a JSON manifest.

Each embedding file starts with ``<count> <dim> <kind>`` followed by one
line per row: the row label then `dim` decimals written with ``%.17g`` so
float64 values round-trip exactly. Nothing time-dependent is written, so
identical tables give byte-identical directories.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Vocabulary
from .model import EmbeddingTable
from .trainer import TrainConfig

KINDS = ("source", "target", "relation")
MANIFEST = "manifest.json"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    table: EmbeddingTable
    manifest: dict
    entity_labels: list[str]
    relation_labels: list[str]

    @property
    def config(self) -> TrainConfig:
        return TrainConfig(**self.manifest["config"])


def _labels(count: int, names: list[str] | None) -> list[str]:
    if names is None:
        return [str(i) for i in range(count)]
    if len(names) != count:
        raise CheckpointError(f"{len(names)} labels for {count} rows")
    return list(names)


def write_matrix(path: Path, matrix: np.ndarray, kind: str, labels: list[str]) -> None:
    if kind not in KINDS:
        raise CheckpointError(f"unknown kind {kind!r}")
    n, d = matrix.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{n} {d} {kind}\n")
        for label, row in zip(labels, matrix):
            if not label or label != label.strip() or "\n" in label:
                raise CheckpointError(f"label {label!r} cannot be stored")
            fh.write(label + " " + " ".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix(path: Path) -> tuple[np.ndarray, str, list[str]]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise CheckpointError(f"{path}: bad header")
        n, d, kind = int(header[0]), int(header[1]), header[2]
        if kind not in KINDS:
            raise CheckpointError(f"{path}: unknown kind {kind!r}")
        matrix = np.empty((n, d))
        labels = []
        for i in range(n):
            line = fh.readline().rstrip("\n")
            parts = line.rsplit(" ", d)  # labels may contain spaces
            if len(parts) != d + 1:
                raise CheckpointError(f"{path}:{i + 2}: expected label and {d} values")
            labels.append(parts[0])
            matrix[i] = [float(v) for v in parts[1:]]
        if fh.read().strip():
            raise CheckpointError(f"{path}: trailing content after {n} rows")
    return matrix, kind, labels


def save_checkpoint(directory, table: EmbeddingTable, config: TrainConfig,
                    vocab: Vocabulary | None = None, extra: dict | None = None) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    ents = _labels(table.n_nodes, vocab.entities if vocab else None)
    rels = _labels(table.n_relations, vocab.relations if vocab else None)
    for kind, labels in zip(KINDS, (ents, ents, rels)):
        write_matrix(out / f"{kind}.emb", getattr(table, kind), kind, labels)
    manifest = {
        "format": FORMAT_VERSION,
        "model": config.model,
        "mode": config.bridge.short,
        "dim": table.dim,
        "seed": config.seed,
        "config_hash": config.digest(),
        "config": config.to_dict(),
        "files": {k: f"{k}.emb" for k in KINDS},
    }
    if extra:
        manifest["extra"] = extra
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def load_checkpoint(directory) -> Checkpoint:
    src = Path(directory)
    try:
        manifest = json.loads((src / MANIFEST).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CheckpointError(f"{src}: no {MANIFEST}") from None
    mats, labels = {}, {}
    for kind in KINDS:
        m, k, lab = read_matrix(src / manifest["files"][kind])
        if k != kind:
            raise CheckpointError(f"{kind} file declares kind {k!r}")
        mats[kind], labels[kind] = m, lab
    if labels["source"] != labels["target"]:
        raise CheckpointError("source and target label lists differ")
    table = EmbeddingTable(mats["source"], mats["target"], mats["relation"])
    if table.dim != manifest["dim"]:
        raise CheckpointError("manifest dim does not match the embedding files")
    return Checkpoint(table, manifest, labels["source"], labels["relation"])
