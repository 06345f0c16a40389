import csv
import io
import json
import math
import subprocess
import sys

import pytest

from modgraphs import verify
from modgraphs.analytic import ClassConstants
from modgraphs.cli import main
from modgraphs.graph import LabeledGraph, format_graph, parse_graph
from modgraphs.tree import load_tree, modular_decomposition


@pytest.fixture
def p4_file(tmp_path):
    path = tmp_path / "p4.txt"
    path.write_text(format_graph(LabeledGraph.path(4)))
    return str(path)


def test_decompose(p4_file, capsys):
    assert main(["decompose", p4_file]) == 0
    out = capsys.readouterr().out
    assert load_tree(out) == modular_decomposition(LabeledGraph.path(4))


def test_counts_with_prediction(capsys):
    assert main(["--class", "builtin:empty", "counts", "6"]) == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert [int(r[1]) for r in rows] == [1, 2, 8, 52, 472, 5504]
    assert all(len(r) == 4 for r in rows)
    assert float(rows[-1][3]) == pytest.approx(1.0, abs=0.1)


def test_global_flags_after_subcommand(capsys):
    assert main(["counts", "4", "--class", "builtin:p4"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].split("\t")[1] == "64"


def test_constants(capsys):
    assert main(["constants", "--class", "builtin:empty"]) == 0
    vals = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert float(vals["kappa"]) == pytest.approx(math.log(2), abs=1e-11)
    assert float(vals["p"]) == pytest.approx(0.5, abs=1e-11)


def test_sample_split(tmp_path, capsys):
    out = tmp_path / "g"
    assert main(["sample", "12", "--count", "3", "--split", "--class", "builtin:paths", "--seed", "5",
                 "--out", str(out)]) == 0
    graphs = [parse_graph((tmp_path / f"g.{i}").read_text()) for i in range(3)]
    assert all(g.n == 12 for g in graphs)
    # reproducible
    assert main(["sample", "12", "--class", "builtin:paths", "--seed", "5"]) == 0
    assert parse_graph(capsys.readouterr().out) == graphs[0]


def test_sample_split_needs_out():
    assert main(["sample", "5", "--count", "2", "--split"]) == 2


def test_occ(p4_file, capsys):
    assert main(["occ", "P4", p4_file]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert out == {"isomorphic": "24", "labeled": "2"}


def test_density_csv(capsys):
    assert main(["density", "--sizes", "30", "--samples", "5", "--pattern", "K2", "--pattern", "P4",
                 "--class", "builtin:p4", "--seed", "3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["statistic"] for r in rows] == ["K2", "n4:1-2,2-3,3-4"]
    assert all(int(r["samples"]) == 5 for r in rows)


def test_scaling_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scaling", "--sizes", "20", "40", "--samples", "4", "--pattern", "P4", "--class", "builtin:p4",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["size"]) for r in rows] == [20, 40]


def test_bad_graph_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n1 x\n")
    assert main(["decompose", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_class_file(capsys):
    assert main(["--class", "/nonexistent/class.json", "constants"]) == 2
    assert "not found" in capsys.readouterr().err


def test_missing_graph_file(capsys):
    assert main(["decompose", "/nonexistent/g.txt"]) == 2


def test_verify_single_criterion(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--only", "4", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] and data["criteria"][0]["number"] == 4


def test_verify_reports_broken_constants(monkeypatch, capsys):
    def wrong(cls, tol=1e-12):
        return ClassConstants(kappa=0.7, R=0.38, K=1.01, mu=1.2, C=0.35, p=0.49, lambda2=2.0, q=0.51)

    monkeypatch.setattr(verify, "solve_constants", wrong)
    assert main(["verify", "--only", "4"]) == 1
    err = capsys.readouterr().err
    assert "criterion  4 FAIL" in err and "closed-form constants" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modgraphs.cli", "counts", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].split("\t")[:2] == ["3", "8"]
