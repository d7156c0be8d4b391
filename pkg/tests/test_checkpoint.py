import filecmp

import numpy as np
import pytest

from conftest import random_graph
from mnembed.checkpoint import CheckpointError, load_checkpoint, read_matrix, save_checkpoint, write_matrix
from mnembed.evaluation import eval_triplet_classification
from mnembed.graph import Vocabulary
from mnembed.model import EmbeddingTable
from mnembed.trainer import TrainConfig, train


def test_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    table = EmbeddingTable(rng.normal(size=(5, 3)) * 1e-7, rng.normal(size=(5, 3)) * 1e5, rng.normal(size=(2, 3)))
    vocab = Vocabulary(["a", "b", "c d", "e", "f"], ["r", "s"])
    cfg = TrainConfig(dim=3, bridge="mul", seed=4)
    save_checkpoint(tmp_path, table, cfg, vocab)
    ck = load_checkpoint(tmp_path)
    assert ck.table.equals(table)
    assert ck.entity_labels == vocab.entities and ck.relation_labels == vocab.relations
    assert ck.manifest["mode"] == "mul" and ck.manifest["dim"] == 3 and ck.manifest["seed"] == 4
    assert ck.manifest["config_hash"] == cfg.digest()
    assert ck.config == cfg


def test_header_and_row_layout(tmp_path):
    table = EmbeddingTable.zeros(2, 1, 2)
    save_checkpoint(tmp_path, table, TrainConfig(dim=2))
    lines = (tmp_path / "relation.emb").read_text().splitlines()
    assert lines[0] == "1 2 relation"
    assert lines[1] == "0 0 0"


def test_bad_files(tmp_path):
    p = tmp_path / "x.emb"
    p.write_text("2 2 source\na 1 2\n")
    with pytest.raises(CheckpointError):
        read_matrix(p)
    p.write_text("1 2 weird\na 1 2\n")
    with pytest.raises(CheckpointError):
        read_matrix(p)
    with pytest.raises(CheckpointError):
        write_matrix(p, np.zeros((1, 1)), "source", [" padded"])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing")


def test_identical_runs_give_identical_bytes(tmp_path, rng):
    g = random_graph(rng, n_nodes=25, n_edges=150)
    cfg = TrainConfig(dim=6, samples=20_000, seed=8)
    for name in ("a", "b"):
        save_checkpoint(tmp_path / name, train(g, cfg).table, cfg)
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b",
                                               ["source.emb", "target.emb", "relation.emb", "manifest.json"],
                                               shallow=False)
    assert not mismatch and not errors and len(match) == 4


def test_reloaded_checkpoint_reproduces_accuracy(tmp_path, rng):
    g = random_graph(rng, n_nodes=25, n_edges=150)
    cfg = TrainConfig(dim=6, samples=20_000)
    table = train(g, cfg).table
    save_checkpoint(tmp_path, table, cfg)
    again = load_checkpoint(tmp_path).table
    assert (eval_triplet_classification(g, table, seed=2).accuracy
            == eval_triplet_classification(g, again, seed=2).accuracy)
