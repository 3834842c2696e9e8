import json
import shutil
import subprocess

import networkx as nx
import numpy as np
import pytest

from provdelta.cli import main
from provdelta.traceio import read_trace

from conftest import data_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_diff_input_change(capsys):
    code, out, _ = run(capsys, "diff", data_path("input_change_a.json"), data_path("input_change_b.json"))
    assert code == 1
    assert out.startswith("verdict: divergent\n")
    assert "dataMismatch=5" in out and "serviceMismatch=0" in out


def test_diff_self_is_identical(capsys):
    f = data_path("evolved_a.json")
    code, out, _ = run(capsys, "diff", f, f)
    assert code == 0 and out.startswith("verdict: identical")


def test_diff_unrelated_no_sync(capsys):
    code, out, _ = run(capsys, "diff", data_path("unrelated_a.json"), data_path("unrelated_b.json"), "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "noSyncPoint"


def test_diff_outputs_and_plot(capsys, tmp_path):
    graphml, png = tmp_path / "d.graphml", tmp_path / "d.png"
    code, out, _ = run(
        capsys, "diff", data_path("evolved_a.json"), data_path("evolved_b.json"),
        "--out", graphml, "--plot", png, "--format", "csv",
    )
    assert code == 1
    assert out.splitlines()[0] == "index,kind,left,right,parents,syncService"
    assert len(out.splitlines()) == 13
    assert nx.read_graphml(graphml).number_of_nodes() == 12
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_diff_bad_file_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    code, _, err = run(capsys, "diff", bad, data_path("input_change_a.json"))
    assert code == 2 and "line 1" in err
    code, _, _ = run(capsys, "diff", tmp_path / "missing.json", data_path("input_change_a.json"))
    assert code == 2


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", data_path("input_change_a.json"))
    assert code == 0 and out == "valid\n"
    doc = json.loads(data_path("input_change_a.json").read_text())
    doc["edges"] = doc["edges"][1:]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", broken, "--format", "json")
    assert code == 1 and not json.loads(out)["valid"]


def test_export_to_stdout(capsysbinary):
    assert main(["export", str(data_path("input_change_a.json")), str(data_path("input_change_b.json"))]) == 0
    assert b"<graphml" in capsysbinary.readouterr().out


def test_data_diff_csv(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("Sample,Value\n1,2\n")
    b.write_text("sample,value\n1,2\n")
    assert run(capsys, "data-diff", a, a)[0] == 0
    code, out, _ = run(capsys, "data-diff", a, b)
    assert code == 1 and "similarity: 0.500000" in out
    code, out, _ = run(capsys, "data-diff", a, b, "--ignore-case", "--format", "json")
    assert code == 0 and json.loads(out)["similarity"] == 1.0


def test_data_diff_unknown_type(capsys, tmp_path):
    a = tmp_path / "a.bin"
    a.write_bytes(b"\x00\x01")
    assert run(capsys, "data-diff", a, a, "--mime", "application/x-thing")[0] == 2
    assert run(capsys, "data-diff", a, a, "--mime", "application/x-thing", "--fallback")[0] == 0


def test_data_diff_models(capsys, tmp_path):
    rng = np.random.default_rng(0)
    est = rng.uniform(0, 10, 30)
    left, right, png = tmp_path / "l.csv", tmp_path / "r.csv", tmp_path / "fit.png"
    left.write_text("estimated,actual\n" + "".join(f"{e},{e + rng.normal(0, 0.1)}\n" for e in est))
    right.write_text("estimated,actual\n" + "".join(f"{e},{e + 2 + rng.normal(0, 0.1)}\n" for e in est))
    code, out, _ = run(
        capsys, "data-diff", left, right, "--mime", "application/x-model-predictions+csv", "--plot", png
    )
    assert code == 1 and "equivalent: false" in out
    assert png.exists()


def test_simulate(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", data_path("input_change_scenario.json"), "--out-dir", tmp_path)
    assert code == 0
    expected = json.loads((tmp_path / "expected.json").read_text())
    shipped = json.loads(data_path("input_change_expected.json").read_text())
    assert expected == shipped
    code, out, _ = run(capsys, "diff", tmp_path / "traceA.json", tmp_path / "traceB.json", "--format", "json")
    pairs = {(n["left"], n["right"]) for n in json.loads(out)["nodes"] if n["kind"] == "dataMismatch"}
    assert code == 1 and sorted(map(list, pairs)) == shipped["mismatches"]


def test_simulate_empty_ops_identical(capsys, tmp_path):
    doc = json.loads(data_path("input_change_scenario.json").read_text())
    doc["ops"] = []
    (tmp_path / "s.json").write_text(json.dumps(doc))
    run(capsys, "simulate", tmp_path / "s.json", "--out-dir", tmp_path)
    assert read_trace(tmp_path / "traceA.json").data_nodes == read_trace(tmp_path / "traceB.json").data_nodes
    assert run(capsys, "diff", tmp_path / "traceA.json", tmp_path / "traceB.json")[0] == 0


def test_simulate_seed_change_keeps_traces(capsys, tmp_path):
    doc = json.loads(data_path("input_change_scenario.json").read_text())
    outs = []
    for seed in (1, 99):
        doc["seed"] = seed
        (tmp_path / "s.json").write_text(json.dumps(doc))
        run(capsys, "simulate", tmp_path / "s.json", "--out-dir", tmp_path / str(seed))
        outs.append((tmp_path / str(seed) / "traceB.json").read_bytes())
    assert outs[0] == outs[1]


def test_simulate_invalid_scenario(capsys, tmp_path):
    (tmp_path / "s.json").write_text('{"seed": 1}')
    assert run(capsys, "simulate", tmp_path / "s.json", "--out-dir", tmp_path)[0] == 2


def test_bad_flags(capsys):
    f = data_path("input_change_a.json")
    assert run(capsys, "diff", f, f, "--threshold", "2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


@pytest.mark.skipif(shutil.which("provdelta") is None, reason="console script not installed")
def test_console_script():
    f = str(data_path("input_change_a.json"))
    proc = subprocess.run(["provdelta", "diff", f, f], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("verdict: identical")
