import pytest

from mnembed.datasets import DatasetMissing, benchmark_files


def test_finds_short_or_release_names(tmp_path, monkeypatch):
    d = tmp_path / "wn18"
    d.mkdir()
    for n in ("wordnet-mlj12-train.txt", "wordnet-mlj12-valid.txt", "wordnet-mlj12-test.txt"):
        (d / n).write_text("a\tr\tb\n")
    monkeypatch.setenv("MNE_DATA_DIR", str(tmp_path))
    assert [p.name for p in benchmark_files("WN18")][0] == "wordnet-mlj12-train.txt"


def test_missing_dataset_message(tmp_path):
    with pytest.raises(DatasetMissing, match="MNE_DATA_DIR"):
        benchmark_files("fb15k", tmp_path)
    with pytest.raises(KeyError):
        benchmark_files("yago", tmp_path)
