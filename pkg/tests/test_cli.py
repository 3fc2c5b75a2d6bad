import hashlib
import json
import subprocess
import sys

import pytest

from probmives.cli import main
from probmives.hierarchy import load_tree
from probmives.resources import data_path

CRITERIA = [c.id for c in load_tree(data_path("sustainability")).criteria]


def write_ratings(path, groups, skip=None, value=lambda i, k: 5 + (i + k) % 5):
    crit = [c for c in CRITERIA if c != skip]
    lines = ["respondent,group," + ",".join(crit)]
    for i, g in enumerate(groups):
        lines.append(f"r{i},{g}," + ",".join(str(value(i, k)) for k in range(len(crit))))
    path.write_text("\n".join(lines) + "\n")
    return path


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_validate(tmp_path, capsys):
    assert main(["validate", "--tree", "@sustainability"]) == 0
    assert "12 criteria" in capsys.readouterr().out
    doc = json.loads(data_path("sustainability").read_text())
    doc["requirements"][0]["criteria"][0]["ahp_weight"] = 0.9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--tree", str(bad)]) == 1
    assert "violation" in capsys.readouterr().out
    assert main(["validate", "--tree", str(tmp_path / "missing.json")]) == 2


def test_ahp_uniform(tmp_path, capsys):
    p = write_ratings(tmp_path / "r.csv", ["A", "B"], value=lambda i, k: 6)
    out = tmp_path / "w.json"
    assert main(["ahp", "--ratings", str(p), "--tree", "@sustainability", "--group", "General", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["profiles"]["General"]["C1"] == pytest.approx(1 / 3)
    assert doc["profiles"]["General"]["C4"] == pytest.approx(1 / 2)


def test_ahp_six_groups(tmp_path):
    groups = ["Architect", "Engineer", "Manufacturer", "Contractor", "Researcher", "Client"] * 3
    p = write_ratings(tmp_path / "r.csv", groups)
    out = tmp_path / "w.json"
    assert main(["ahp", "--ratings", str(p), "--tree", "@sustainability", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["profiles"]) == 7


def test_ahp_errors(tmp_path, capsys):
    p = write_ratings(tmp_path / "r.csv", ["A"], skip="C5")
    assert main(["ahp", "--ratings", str(p), "--tree", "@sustainability"]) == 1
    assert "C5" in capsys.readouterr().err
    q = write_ratings(tmp_path / "q.csv", ["A", "B"])
    assert main(["ahp", "--ratings", str(q), "--tree", "@sustainability", "--group", "Z"]) == 1
    assert "available: A, B" in capsys.readouterr().err


def test_simulate_defaults_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["simulate", "--tree", "@sustainability", "--values", "@table4", "--out", str(out)]) == 0
    doc = json.loads(a.read_text())
    assert len(doc["runs"]["overall"]) == 1000 and len(doc["scenarios"]) == 3
    assert sha(a) == sha(b)
    manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert manifest["outputs"][str(a)] == sha(a)
    assert manifest["seed"] == 20230131


def test_simulate_options(tmp_path):
    out = tmp_path / "one.json"
    w = tmp_path / "w.csv"
    args = ["simulate", "--tree", "@circularity", "--values", "@table4", "--runs", "1", "--mode", "reject",
            "--seed", "3", "--req-weights", "0.4,0.2,0.2,0.2", "--weights-csv", str(w), "--out", str(out)]
    assert main(args) == 0
    doc = json.loads(out.read_text())
    assert len(doc["runs"]["overall"]) == 1
    assert doc["config"]["requirement_weights"]["B1"] == 0.4
    assert doc["config"]["constraint_mode"] == "reject-resample"
    assert len(w.read_text().splitlines()) == 2


def test_simulate_errors(tmp_path):
    base = ["simulate", "--tree", "@sustainability", "--values", "@table4", "--out", str(tmp_path / "x.json")]
    assert main(base + ["--req-weights", "0.5,0.5"]) == 1
    assert main(base + ["--req-weights", "a,b"]) == 2
    assert main(base + ["--runs", "0"]) == 1
    assert main(["simulate", "--tree", "nope.json", "--values", "@table4", "--out", "x"]) == 2
    assert main(["simulate"]) == 2


def test_report(tmp_path):
    outs = []
    for par in ("sustainability", "circularity"):
        out = tmp_path / f"{par}.json"
        assert main(["simulate", "--tree", f"@{par}", "--values", "@table4", "--runs", "100", "--out", str(out)]) == 0
        outs.append(out)
    single = tmp_path / "single"
    assert main(["report", "--results", str(outs[0]), "--charts", str(single)]) == 0
    assert not (single / "comparison_means.svg").exists()
    assert (single / "sustainability_heatmap_criteria.svg").exists()
    both = tmp_path / "both"
    assert main(["report", "--results", *map(str, outs), "--charts", str(both)]) == 0
    assert (both / "comparison_means.svg").exists()
    assert (both / "circularity_heatmap_criteria.svg").exists()
    manifest = json.loads((both / "manifest.json").read_text())
    assert str(both / "summary.json") in manifest["outputs"]


def test_report_corrupt(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "probmives.simulation/1",\n  "runs": [1, 2,\n')
    assert main(["report", "--results", str(bad), "--charts", str(tmp_path / "c")]) == 1
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "probmives.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
