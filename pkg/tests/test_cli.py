import csv
import json

import pytest

from sethreat.cli import main, parse_overrides, UsageError

MINIMAL = ["--attackers", "1", "--victims", "1", "--methods", "1", "--vulnerabilities", "1",
           "--mediums", "1", "--mechanisms", "1", "--performs", "1", "--has-vulnerability", "1",
           "--exploits", "1", "--uses-medium", "1", "--no-calibrate"]


def read_header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


@pytest.fixture(scope="module")
def world_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("world")
    assert main(["synth", "--seed", "42", "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def data_dir(world_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert main(["featurize", "--world", str(world_dir), "--combo", "1,2,3,4",
                 "--out", str(out)]) == 0
    return out


def test_synth_writes_three_files_deterministically(world_dir, tmp_path):
    names = sorted(p.name for p in world_dir.iterdir())
    assert names == ["labels.tsv", "triples.tsv", "world_meta.json"]
    assert main(["synth", "--seed", "42", "--out", str(tmp_path)]) == 0
    for name in names:
        assert (tmp_path / name).read_bytes() == (world_dir / name).read_bytes()


def test_synth_meta_shows_inventory(world_dir):
    meta = json.loads((world_dir / "world_meta.json").read_text())
    counts = meta["counts"]
    kinds = ("attacker", "victim", "attack_method", "human_vulnerability", "attack_medium",
             "effect_mechanism")
    assert [counts["entities"][k] for k in kinds] == [15, 15, 33, 43, 12, 33]
    assert [counts["edges"][r] for r in ("performs", "has_vulnerability", "exploits",
                                         "uses_medium")] == [25, 88, 97, 29]
    assert counts["labels"]["total"] == 225
    assert abs(float(meta["noiseless_positive_share"]) - 0.613) <= 0.02 + 5e-4


def test_synth_minimal_world(tmp_path):
    assert main(["synth", *MINIMAL, "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "labels.tsv").read_text().splitlines()) == 1


@pytest.mark.parametrize("combo, columns", [(1, 78), (2, 121), (3, 133), (4, 166)])
def test_featurize_column_counts(data_dir, combo, columns):
    header = read_header(data_dir / f"dataset_c{combo}.csv")
    assert len(header) == columns
    assert header[0] == "pair_id" and header[-1] == "label"
    layout = json.loads((data_dir / f"layout_c{combo}.json").read_text())
    assert len(header) == sum(s["width"] for s in layout["segments"]) + 2
    assert set(layout["inputs"]) == {"triples.tsv", "labels.tsv"}


def test_featurize_empty_labels(world_dir, tmp_path):
    world = tmp_path / "w"
    world.mkdir()
    (world / "triples.tsv").write_bytes((world_dir / "triples.tsv").read_bytes())
    (world / "labels.tsv").write_text("")
    assert main(["featurize", "--world", str(world), "--combo", "1",
                 "--out", str(tmp_path / "d")]) == 0
    lines = (tmp_path / "d" / "dataset_c1.csv").read_text().splitlines()
    assert len(lines) == 1 and len(lines[0].split(",")) == 78


def test_featurize_errors(world_dir, tmp_path, capsys):
    assert main(["featurize", "--world", str(tmp_path), "--out", str(tmp_path / "o")]) == 3
    assert main(["featurize", "--world", str(world_dir), "--combo", "5",
                 "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "missing input file" in err and "combination" in err


def test_evaluate_single_cell(data_dir, tmp_path):
    out = tmp_path / "r"
    assert main(["evaluate", "--data", str(data_dir), "--models", "decision_tree",
                 "--combos", "1", "--reps", "1", "--folds", "2", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["cells"]) == 1
    assert report["meta"]["run"]["folds"] == 2
    assert report["meta"]["models"]["decision_tree"] == {"max_depth": 6}
    assert set(report["meta"]["inputs"]) == {"dataset_c1.csv", "layout_c1.json"}
    rows = (out / "metrics.csv").read_text().splitlines()
    assert len(rows) == 1 + 3


def test_evaluate_repeatable_bytes(data_dir, tmp_path):
    args = ["evaluate", "--data", str(data_dir), "--models", "decision_tree,naive_bayes",
            "--combos", "1,3", "--reps", "2", "--seed", "3"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for name in ("report.json", "metrics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_evaluate_export_trees(data_dir, tmp_path):
    trees = tmp_path / "trees"
    assert main(["evaluate", "--data", str(data_dir), "--models", "decision_tree",
                 "--combos", "3", "--reps", "2", "--folds", "3", "--out", str(tmp_path / "r"),
                 "--export-trees", str(trees)]) == 0
    assert sorted(p.name for p in trees.iterdir()) == [
        f"tree_c3_r{r}_f{f}.dot" for r in range(2) for f in range(3)]


def test_evaluate_set_overrides(data_dir, tmp_path):
    out = tmp_path / "r"
    assert main(["evaluate", "--data", str(data_dir), "--models", "svm", "--combos", "1",
                 "--reps", "1", "--set", "svm.C=2.5", "--set", "svm.kernel=linear",
                 "--out", str(out)]) == 0
    meta = json.loads((out / "report.json").read_text())["meta"]
    assert meta["models"]["svm"]["C"] == 2.5 and meta["models"]["svm"]["kernel"] == "linear"
    assert meta["run"]["set"] == {"svm": {"C": 2.5, "kernel": "linear"}}


@pytest.mark.parametrize("extra", [
    ["--set", "svm.gamma=1"],
    ["--set", "nope.x=1"],
    ["--set", "svm"],
    ["--models", "perceptron"],
    ["--combos", "0"],
])
def test_evaluate_usage_errors(data_dir, tmp_path, extra):
    code = main(["evaluate", "--data", str(data_dir), "--reps", "1",
                 "--out", str(tmp_path / "r"), *extra])
    assert code == 2
    assert not (tmp_path / "r").exists()


def test_evaluate_missing_data(tmp_path):
    assert main(["evaluate", "--data", str(tmp_path), "--out", str(tmp_path / "r")]) == 3
    assert not (tmp_path / "r" / "report.json").exists()


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["synth"])
    assert info.value.code == 2


def test_malformed_triples_exit_3(tmp_path, capsys):
    (tmp_path / "triples.tsv").write_text("a1\tis_a\n")
    (tmp_path / "labels.tsv").write_text("")
    assert main(["featurize", "--world", str(tmp_path), "--out", str(tmp_path / "o")]) == 3
    assert "line 1" in capsys.readouterr().err


def test_parse_overrides():
    assert parse_overrides(["mlp.hidden=[8, 4]", "svm.kernel=linear"]) == {
        "mlp": {"hidden": [8, 4]}, "svm": {"kernel": "linear"}}
    with pytest.raises(UsageError):
        parse_overrides(["mlp.depth=3"])
