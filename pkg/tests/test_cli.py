import csv
import io
import json

import pytest

from embedlab import checks, cli
from embedlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_text_and_json(capsys):
    code, out, _ = run(capsys, "analyze", "rot/1")
    assert code == 0 and "leakage.delta" in out and "0.311278" in out
    code, out, _ = run(capsys, "analyze", "primitive://ot/1", "--format", "json")
    d = json.loads(out)
    assert d["free_phase_coordinates"] == 1 and d["leakage"]["delta"] == pytest.approx(0.5, abs=1e-11)
    assert d["trivial"] is False and d["I_XY"] == 1.0


def test_analyze_coords_matches_phases(capsys):
    _, a, _ = run(capsys, "analyze", "ot/1", "--coords", "1.3", "--format", "json")
    phases = json.loads(a)["phases"]
    _, b, _ = run(capsys, "analyze", "ot/1", "--phases", ",".join(map(str, phases)), "--format", "json")
    assert json.loads(a)["leakage"] == json.loads(b)["leakage"]


def test_analyze_json_file(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"x": ["0", "1"], "y": ["0", "1"], "p": [[0.5, 0], [0, 0.5]]}))
    code, out, _ = run(capsys, "analyze", str(f), "--format", "json")
    assert code == 0 and json.loads(out)["trivial"] is True


def test_minimize_manifest_deterministic(capsys, tmp_path):
    m1, m2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ["minimize", "ot/1", "--restarts", "4", "--seed", "3", "--format", "json"]
    code, out1, _ = run(capsys, *args, "--manifest", str(m1))
    assert code == 0
    _, out2, _ = run(capsys, *args, "--manifest", str(m2))
    assert out1 == out2
    a, b = cli.RunManifest.load(m1), cli.RunManifest.load(m2)
    assert a.results == b.results and a.seed == 3 and a.command == "minimize"
    assert a.results["best_delta"] == pytest.approx(0.5, abs=1e-4)
    assert len(a.results["per_restart"]) == 4


def test_out_writes_sidecar_manifest(capsys, tmp_path):
    out = tmp_path / "t.csv"
    code, stdout, _ = run(capsys, "table1", "--format", "csv", "--max-r", "3", "--out", str(out))
    assert code == 0 and stdout == ""
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == cli.TABLE1_COLUMNS
    rot1 = rows[0]
    assert rot1["row"] == "ROT^1" and float(rot1["abs_diff"]) < 1e-3
    assert json.loads((tmp_path / "t.csv.manifest.json").read_text())["command"] == "table1"


def test_table1_rows():
    rows = cli.table1_rows(max_r=4, numeric_max_r=4)
    for r in rows:
        if r["reference_value"] is not None:
            assert r["abs_diff"] < 1e-3, r
    closed = {r["parameter"]: r["computed"] for r in rows if r["row"] == "ROT^r" and r["method"] == "closed form"}
    numeric = {r["parameter"]: r["computed"] for r in rows if r["row"] == "ROT^r" and r["method"] != "closed form"}
    for k in numeric:
        assert numeric[k] == pytest.approx(closed[k], abs=1e-9)


def test_attack(capsys):
    code, out, _ = run(capsys, "attack", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["bob"]["conclusive_probability"] == pytest.approx(0.5, abs=1e-11)
    assert d["alice"]["conditional_correctness"] == pytest.approx(1.0, abs=1e-11)
    code, out, _ = run(capsys, "attack", "--side", "bob")
    assert "bob: conclusive 0.5" in out and "alice" not in out


def test_check_and_property_failure(capsys, monkeypatch):
    code, out, _ = run(capsys, "check", "monotone")
    assert code == 0 and "all properties hold" in out

    def failing(seed):
        r = checks.PropertyResult("always fails")
        r.record(False, 1.0)
        return [r]

    monkeypatch.setitem(checks._RUNNERS, "monotone", failing)
    code, out, _ = run(capsys, "check", "monotone")
    assert code == 1 and "FAIL" in out


def test_export(capsys, tmp_path):
    code, out, _ = run(capsys, "export", "sand")
    assert code == 0 and json.loads(out)["x"] == ["00", "01", "10", "11"]
    code, _, _ = run(capsys, "export", "catalog", "--out", str(tmp_path / "cat"))
    assert code == 0
    assert len(list((tmp_path / "cat").glob("*.json"))) == len(cli.EXPORT_CATALOG)
    code, _, err = run(capsys, "export", "catalog")
    assert code == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["analyze", "bogus"], 2),
        (["analyze", "rot/x"], 2),
        (["analyze", "/nonexistent/file.json"], 2),
        (["analyze"], 2),
        (["analyze", "rot/99"], 3),
        (["analyze", "otp/0.7"], 3),
        (["analyze", "ot/1", "--coords", "1", "2"], 2),
        (["analyze", "ot/1", "--coords", "1,2"], 3),
        (["minimize", "ot/4", "--restarts", "1"], 4),
        (["minimize", "ot/1", "--restarts", "0"], 3),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_csv_flattening(capsys):
    code, out, _ = run(capsys, "analyze", "sand", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert rows["key"] == "value" and float(rows["leakage.delta"]) == pytest.approx(0.5, abs=1e-9)
