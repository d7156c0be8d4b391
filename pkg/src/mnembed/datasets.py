"""Locate the WN18 / FB15K benchmark files on disk (no downloading).

Looks under ``$MNE_DATA_DIR`` (default ``./data``) for ``<name>/`` holding
train/valid/test splits in ``head<TAB>relation<TAB>tail`` form, under
either short names (``train.txt``) or the original release names.
"""
from __future__ import annotations

import os
from pathlib import Path

BENCHMARKS = {
    # name: (|V|, |R|, |E|) over train + valid + test
    "wn18": (40943, 18, 151442),
    "fb15k": (14951, 1345, 592213),
}

_SPLIT_NAMES = {
    "wn18": [("train.txt", "valid.txt", "test.txt"),
             ("wordnet-mlj12-train.txt", "wordnet-mlj12-valid.txt", "wordnet-mlj12-test.txt")],
    "fb15k": [("train.txt", "valid.txt", "test.txt"),
              ("freebase_mtr100_mte100-train.txt", "freebase_mtr100_mte100-valid.txt",
               "freebase_mtr100_mte100-test.txt")],
}


class DatasetMissing(FileNotFoundError):
    pass


def data_root() -> Path:
    return Path(os.environ.get("MNE_DATA_DIR", "data"))


def benchmark_files(name: str, root: Path | None = None) -> list[Path]:
    """The split files for `name`, or DatasetMissing explaining where they were sought."""
    name = name.lower()
    if name not in BENCHMARKS:
        raise KeyError(f"unknown benchmark {name!r}")
    base = (root or data_root()) / name
    for names in _SPLIT_NAMES[name]:
        paths = [base / n for n in names]
        if all(p.is_file() for p in paths):
            return paths
    tried = " or ".join("/".join(n) for n in _SPLIT_NAMES[name])
    raise DatasetMissing(f"{name} not found: expected {tried} under {base} (set MNE_DATA_DIR)")
