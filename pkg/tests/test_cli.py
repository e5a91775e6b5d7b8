import csv
import json
import math

import pytest

from ifsdim.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


@pytest.mark.parametrize("name, line", [
    ("sierpinski.json", "s = 1.584962500721156"),
    ("cantor.json", "s = 0.6309297535714574"),
    ("single.json", "s = 0"),
])
def test_moran_output(capsys, specs_dir, name, line):
    code, out, _ = run(capsys, "moran", specs_dir / name)
    assert code == 0
    assert out.splitlines()[0] == line
    assert "method = closed-form" in out


def test_dims_sierpinski(capsys, specs_dir, tmp_path):
    code, out, _ = run(capsys, "dims", specs_dir / "sierpinski.json", "--out", tmp_path,
                       "--points", 200000, "--seed", 1)
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    body = rep["report"]
    for key in ("dim1", "dim2", "dim3"):
        assert math.isclose(body[key]["value"], math.log(3) / math.log(2), rel_tol=1e-12)
    assert abs(body["box_estimate"]["slope"] - math.log(3) / math.log(2)) <= 0.05
    assert all(c["status"] == "pass" for c in body["crosscheck"])
    assert len(rep["spec"]["sha256"]) == 64
    with open(tmp_path / "box_counts.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["delta", "grid_count", "packing_count", "log_delta", "log_count"]
    with open(tmp_path / "dim1_sequence.csv") as fh:
        assert next(csv.reader(fh)) == ["n", "value"]


def test_dims_overlap(capsys, specs_dir, tmp_path):
    code, _, _ = run(capsys, "dims", specs_dir / "overlap.json", "--out", tmp_path, "--points", 200000)
    assert code == 0
    body = json.loads((tmp_path / "report.json").read_text())["report"]
    assert abs(body["dim3"]["value"] - 1.7095112913514548) <= 1e-12
    assert abs(body["box_estimate"]["slope"] - 1.0) <= 0.1
    first = body["crosscheck"][0]
    assert first["status"] == "not applicable" and "no OSC certificate" in first["detail"]


def test_dims_single_map(capsys, specs_dir, tmp_path):
    with pytest.warns(RuntimeWarning, match="all box counts are equal"):
        code, _, _ = run(capsys, "dims", specs_dir / "single.json", "--out", tmp_path, "--points", 1000)
    assert code == 0
    body = json.loads((tmp_path / "report.json").read_text())["report"]
    assert body["dim1"]["value"] == body["dim2"]["value"] == body["dim3"]["value"] == 0
    assert body["dim456_upper"]["dim4_upper"] == 0


def test_dims_cap_exit_code(capsys, specs_dir, tmp_path):
    code, _, err = run(capsys, "dims", specs_dir / "sierpinski.json", "--out", tmp_path, "--depth", 20)
    assert code == 3 and "depth 20" in err


def test_dims_deterministic(capsys, specs_dir, tmp_path):
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        assert run(capsys, "dims", specs_dir / "sierpinski.json", "--out", d, "--points", 50000,
                   "--seed", 9)[0] == 0
        doc = json.loads((d / "report.json").read_text())
        doc.pop("timings")
        outs.append((doc, [(d / f).read_bytes() for f in ("box_counts.csv", "dim1_sequence.csv", "dim2_sequence.csv")]))
    assert outs[0] == outs[1]


def test_osc_exit_codes(capsys, specs_dir):
    assert run(capsys, "osc", specs_dir / "sierpinski.json")[0] == 0
    code, out, _ = run(capsys, "osc", specs_dir / "overlap_plane.json")
    assert code == 1 and "overlap (1, 2): witness" in out
    code, _, err = run(capsys, "osc", specs_dir / "cube3d.json")
    assert code == 2 and "requires d = 2" in err
    code, _, err = run(capsys, "osc", specs_dir / "single.json")
    assert code == 2 and "certificate" in err


def test_points_deterministic_depth2(capsys, specs_dir, tmp_path):
    out = tmp_path / "p.csv"
    assert run(capsys, "points", specs_dir / "sierpinski.json", "--depth", 2, "--out", out)[0] == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "y"] and len(rows) == 10


def test_points_chaos_same_seed(capsys, specs_dir, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(capsys, "points", specs_dir / "sierpinski.json", "--mode", "chaos", "--count", 500,
            "--seed", 4, "--out", p)
    assert a.read_bytes() == b.read_bytes()


def test_points_over_cap(capsys, specs_dir):
    assert run(capsys, "points", specs_dir / "sierpinski.json", "--depth", 40)[0] == 3


def test_levels(capsys, specs_dir, tmp_path):
    code, out, _ = run(capsys, "levels", specs_dir / "sierpinski.json", "--n", 1)
    rows = list(csv.reader(out.splitlines()))
    assert code == 0 and rows == [["word", "relative_diameter"], ["1", "0.5"], ["2", "0.5"], ["3", "0.5"]]

    mixed = write(tmp_path, "mixed.json", {"dimension": 1, "maps": [
        {"ratio": 0.5, "shift": [0]}, {"ratio": 1 / 3, "shift": [0.6]}]})
    _, out, _ = run(capsys, "levels", mixed, "--n", 2)
    rows = list(csv.reader(out.splitlines()))[1:]
    assert [r[0] for r in rows] == ["11", "12", "21", "22"]
    for (_, v), want in zip(rows, [0.25, 1 / 6, 1 / 6, 1 / 9]):
        assert math.isclose(float(v), want, rel_tol=1e-15)

    _, out, _ = run(capsys, "levels", specs_dir / "sierpinski.json", "--n", 0)
    assert list(csv.reader(out.splitlines()))[1] == ["", "1.0"]


def test_invalid_input_exit_codes(capsys, tmp_path):
    assert run(capsys, "moran", tmp_path / "nope.json")[0] == 2
    bad = write(tmp_path, "bad.json", {"dimension": 2, "maps": [{"ratio": 0.5, "shift": [0, 0], "x": 1}]})
    code, _, err = run(capsys, "moran", bad)
    assert code == 2 and "maps[0].x" in err


def test_hash_binding_and_monotone_moran(capsys, tmp_path):
    base = {"dimension": 1, "maps": [{"ratio": 0.4, "shift": [0]}, {"ratio": 0.3, "shift": [0.5]}]}
    bumped = json.loads(json.dumps(base))
    bumped["maps"][1]["ratio"] = 0.35
    results = []
    for name, doc in (("a.json", base), ("b.json", bumped)):
        out = tmp_path / name.replace(".json", "")
        run(capsys, "dims", write(tmp_path, name, doc), "--out", out, "--points", 0)
        results.append(json.loads((out / "report.json").read_text()))
    assert results[0]["spec"]["sha256"] != results[1]["spec"]["sha256"]
    assert results[1]["report"]["dim3"]["value"] > results[0]["report"]["dim3"]["value"]
