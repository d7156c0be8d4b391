import subprocess
import sys

import pytest

from mnembed.cli import RunConfig, main, parse_args, read_config_file, UsageError

TOY = "a\tr1\tc\nb\tr1\td\na\tr5\tb\nc\tr5\td\n"


@pytest.fixture
def toy(tmp_path):
    p = tmp_path / "toy.tsv"
    p.write_text(TOY)
    return p


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_census_reports_one_parallelogram(toy, capsys):
    assert main(["census", "--graph", str(toy), "--quiet"]) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert rows[-1][:3] == ["parallelogram", "two-relation", "1"]


def test_train_writes_checkpoint(toy, tmp_path):
    out = tmp_path / "ckpt"
    code = main(["train", "--model", "mne", "--bridge", "add", "--dim", "20", "--graph", str(toy),
                 "--samples", "2000", "--out", str(out), "--quiet"])
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["manifest.json", "relation.emb", "source.emb", "target.emb"]


def test_dump_embeddings(toy, tmp_path, capsys):
    out = tmp_path / "ck"
    main(["train", "--graph", str(toy), "--dim", "3", "--samples", "100", "--out", str(out), "--quiet"])
    capsys.readouterr()
    assert main(["dump-embeddings", "--checkpoint", str(out), "--kind", "relation"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "2 3 relation"


def test_runtime_error_exit_code(tmp_path):
    assert main(["census", "--graph", str(tmp_path / "nope.tsv"), "--quiet"]) == 2


@pytest.mark.parametrize("argv", [
    ["train", "--graph", "x.tsv"],                                  # missing --out
    ["train", "--graph", "x.tsv", "--out", "o", "--dim", "0"],
    ["train", "--graph", "x.tsv", "--out", "o", "--margin", "1"],   # margin without transe
    ["frobnicate"],
    ["census", "--graph", "x.tsv", "--bogus"],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_config_file_equals_flags(tmp_path, toy):
    cfg = tmp_path / "run.conf"
    cfg.write_text(f"# comment\ngraph = {toy}\nmodel = transe\ndim = 12\nmargin = 2.5\nlr-schedule = constant\n")
    from_file = parse_args(["train", "--config", str(cfg), "--out", "o", "--quiet"])
    from_flags = parse_args(["train", "--graph", str(toy), "--model", "transe", "--dim", "12", "--margin", "2.5",
                             "--lr-schedule", "constant", "--out", "o", "--quiet"])
    assert from_file == from_flags
    overridden = parse_args(["train", "--config", str(cfg), "--dim", "7", "--out", "o", "--quiet"])
    assert overridden.dim == 7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("dimension = 3\n")
    with pytest.raises(UsageError, match="unknown key"):
        read_config_file(cfg)
    assert main(["census", "--config", str(cfg)]) == 1


def test_defaults():
    cfg = RunConfig()
    assert cfg.train_config().dim == 100 and cfg.classifier_config().epochs == 50


def test_eval_tc_from_checkpoint_matches_retrain(toy, tmp_path, capsys):
    big = tmp_path / "big.tsv"
    big.write_text("".join(f"n{i}\tr{i % 3}\tn{(i * 7 + 3) % 40}\n" for i in range(200)))
    ck = tmp_path / "ck"
    common = ["--graph", str(big), "--dim", "8", "--samples", "5000", "--seed", "3", "--quiet"]
    main(["train", *common, "--out", str(ck)])
    capsys.readouterr()
    assert main(["eval-tc", *common]) == 0
    direct = capsys.readouterr().out.splitlines()[1].split(",")
    assert main(["eval-tc", *common, "--checkpoint", str(ck)]) == 0
    reloaded = capsys.readouterr().out.splitlines()[1].split(",")
    assert direct[7] == reloaded[7]  # accuracy column


def test_module_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "mnembed", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("mnembed")
